#include "ceph3d/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ceph3d {

namespace {

struct CatalogEntry {
    LandmarkId id;
    std::string_view name;
    LandmarkGroup group;
};

constexpr std::array<CatalogEntry, kNumLandmarks> kCatalog = {{
    {LandmarkId::Na, "Na", LandmarkGroup::Midsagittal},
    {LandmarkId::Bregma, "Bregma", LandmarkGroup::Midsagittal},
    {LandmarkId::CFM, "CFM", LandmarkGroup::Midsagittal},
    {LandmarkId::R_Or, "R_Or", LandmarkGroup::Horizontal},
    {LandmarkId::L_Or, "L_Or", LandmarkGroup::Horizontal},
    {LandmarkId::R_Po, "R_Po", LandmarkGroup::Horizontal},
    {LandmarkId::L_Po, "L_Po", LandmarkGroup::Horizontal},
    {LandmarkId::Me, "Me", LandmarkGroup::Mandible},
    {LandmarkId::R_Cor, "R_Cor", LandmarkGroup::Mandible},
    {LandmarkId::L_Cor, "L_Cor", LandmarkGroup::Mandible},
    {LandmarkId::R_F, "R_F", LandmarkGroup::Mandible},
    {LandmarkId::L_F, "L_F", LandmarkGroup::Mandible},
}};

int round_half_away(double v) {
    return int(std::lround(v));
}

} // namespace

std::string_view landmark_name(LandmarkId id) {
    return kCatalog[std::size_t(id)].name;
}

LandmarkId landmark_from_name(std::string_view name) {
    for (const auto& e : kCatalog)
        if (e.name == name) return e.id;
    throw InvalidArgument("unknown landmark name: " + std::string(name));
}

LandmarkGroup landmark_group(LandmarkId id) {
    return kCatalog[std::size_t(id)].group;
}

std::string_view group_name(LandmarkGroup g) {
    switch (g) {
    case LandmarkGroup::Midsagittal: return "Midsagittal";
    case LandmarkGroup::Horizontal: return "Horizontal";
    case LandmarkGroup::Mandible: return "Mandible";
    }
    throw InvalidArgument("bad landmark group");
}

std::vector<LandmarkId> landmarks_in_group(LandmarkGroup g) {
    std::vector<LandmarkId> out;
    for (const auto& e : kCatalog)
        if (e.group == g) out.push_back(e.id);
    return out;
}

Vec3 LandmarkSet::get(LandmarkId id) const {
    auto it = points_.find(id);
    if (it == points_.end())
        throw DataError("landmark set is missing " + std::string(landmark_name(id)));
    return it->second;
}

AxisTarget encode_axis_target(Vec3i mu, Vec3i dims, double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");

    auto one_axis = [&](int center, int n) {
        std::vector<double> t(std::size_t(n));
        const double inv = 1.0 / (2.0 * sigma * sigma);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = double(i - center);
            // Floor keeps far-tail bins strictly positive; exp underflows to
            // zero beyond ~38 sigma.
            t[std::size_t(i)] = std::max(std::exp(-d * d * inv),
                                         std::numeric_limits<double>::min());
            sum += t[std::size_t(i)];
        }
        for (double& v : t) v /= sum;
        return t;
    };

    AxisTarget out;
    out.sigma = sigma;
    out.x = one_axis(mu.x, dims.x);
    out.y = one_axis(mu.y, dims.y);
    out.z = one_axis(mu.z, dims.z);
    return out;
}

std::map<LandmarkId, AxisTarget> encode_targets(const LandmarkSet& lm, Vec3i dims,
                                                double sigma) {
    if (lm.frame() != Frame::Voxel)
        throw StateError("encode_targets expects a voxel-frame landmark set");
    std::map<LandmarkId, AxisTarget> out;
    for (const auto& [id, p] : lm.points()) {
        const Vec3i v{round_half_away(p.x), round_half_away(p.y), round_half_away(p.z)};
        if (v.x < 0 || v.x >= dims.x || v.y < 0 || v.y >= dims.y || v.z < 0 ||
            v.z >= dims.z)
            throw OutOfBounds("landmark outside grid: " + std::string(landmark_name(id)));
        out.emplace(id, encode_axis_target(v, dims, sigma));
    }
    return out;
}

namespace {

int argmax_lowest(const std::vector<double>& p) {
    if (p.empty()) throw InvalidArgument("cannot decode an empty probability vector");
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw InvalidArgument("probability vector has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-4)
        throw InvalidArgument("probability vector does not sum to 1");
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = i;
    return int(best);
}

double expectation(const std::vector<double>& p) {
    double e = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) e += double(i) * p[i];
    return e;
}

} // namespace

Vec3i decode_prediction(const std::vector<double>& px, const std::vector<double>& py,
                        const std::vector<double>& pz) {
    return {argmax_lowest(px), argmax_lowest(py), argmax_lowest(pz)};
}

Vec3 decode_expectation(const std::vector<double>& px, const std::vector<double>& py,
                        const std::vector<double>& pz) {
    if (px.empty() || py.empty() || pz.empty())
        throw InvalidArgument("cannot decode an empty probability vector");
    return {expectation(px), expectation(py), expectation(pz)};
}

LandmarkSet landmarks_world_to_voxel(const LandmarkSet& lm, const Volume& v) {
    if (lm.frame() != Frame::World)
        throw StateError("landmark set is not in the world frame");
    LandmarkSet out(Frame::Voxel);
    for (const auto& [id, p] : lm.points()) {
        const Vec3 f = v.world_to_voxel(p);
        const Vec3i idx{round_half_away(f.x), round_half_away(f.y), round_half_away(f.z)};
        if (!v.contains_index(idx))
            throw OutOfBounds("landmark outside grid: " + std::string(landmark_name(id)));
        out.set(id, {double(idx.x), double(idx.y), double(idx.z)});
    }
    return out;
}

LandmarkSet landmarks_voxel_to_world(const LandmarkSet& lm, const Volume& v) {
    if (lm.frame() != Frame::Voxel)
        throw StateError("landmark set is not in the voxel frame");
    LandmarkSet out(Frame::World);
    for (const auto& [id, p] : lm.points()) out.set(id, v.voxel_to_world(p));
    return out;
}

void save_landmarks(const LandmarkSet& lm, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << "#frame=" << (lm.frame() == Frame::World ? "world" : "voxel") << "\n";
    char buf[160];
    for (const auto& [id, p] : lm.points()) {
        std::snprintf(buf, sizeof(buf), "%s %.17g %.17g %.17g\n",
                      std::string(landmark_name(id)).c_str(), p.x, p.y, p.z);
        os << buf;
    }
    if (!os) throw IoError("short write: " + path.string());
}

LandmarkSet load_landmarks(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    std::string header;
    if (!std::getline(is, header)) throw IoError("empty landmark file: " + path.string());
    Frame frame;
    if (header == "#frame=world")
        frame = Frame::World;
    else if (header == "#frame=voxel")
        frame = Frame::Voxel;
    else
        throw IoError("bad landmark header in " + path.string());

    LandmarkSet out(frame);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string name;
        Vec3 p;
        if (!(ss >> name >> p.x >> p.y >> p.z))
            throw IoError("bad landmark line in " + path.string() + ": " + line);
        out.set(landmark_from_name(name), p);
    }
    return out;
}

} // namespace ceph3d
