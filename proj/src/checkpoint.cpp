#include "ceph3d/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace ceph3d {

namespace {

constexpr char kMagic[8] = {'C', 'W', '3', 'D', '0', '0', '0', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

} // namespace

void save_checkpoint(const std::vector<CheckpointBlock>& blocks,
                     const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write(kMagic, sizeof(kMagic));
    write_u32(os, std::uint32_t(blocks.size()));
    for (const auto& b : blocks) {
        write_u32(os, std::uint32_t(b.name.size()));
        os.write(b.name.data(), std::streamsize(b.name.size()));
        write_u32(os, std::uint32_t(b.shape.size()));
        for (int d : b.shape) write_u32(os, std::uint32_t(d));
        os.write(reinterpret_cast<const char*>(b.values.data()),
                 std::streamsize(b.values.size() * sizeof(float)));
    }
    if (!os) throw IoError("short write: " + path.string());
}

std::vector<CheckpointBlock> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw IoError("not a CW3D checkpoint: " + path.string());

    const std::uint32_t count = read_u32(is);
    std::vector<CheckpointBlock> blocks;
    blocks.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointBlock b;
        const std::uint32_t name_len = read_u32(is);
        if (!is || name_len > 4096) throw IoError("bad block name in " + path.string());
        b.name.resize(name_len);
        is.read(b.name.data(), name_len);
        const std::uint32_t rank = read_u32(is);
        if (!is || rank > 16) throw IoError("bad block rank in " + path.string());
        std::size_t total = 1;
        for (std::uint32_t r = 0; r < rank; ++r) {
            const std::uint32_t d = read_u32(is);
            b.shape.push_back(int(d));
            total *= d;
        }
        if (!is || total > (std::size_t(1) << 31))
            throw IoError("implausible block size in " + path.string());
        b.values.resize(total);
        is.read(reinterpret_cast<char*>(b.values.data()),
                std::streamsize(total * sizeof(float)));
        if (!is) throw IoError("truncated checkpoint: " + path.string());
        blocks.push_back(std::move(b));
    }
    return blocks;
}

std::vector<CheckpointBlock> blocks_from_params(const std::vector<const ParamBlock<float>*>& params,
                                                const Adadelta<float>* opt) {
    std::vector<CheckpointBlock> blocks;
    for (const auto* p : params)
        blocks.push_back({p->name, p->shape, p->w});
    if (opt) {
        for (const auto* p : params) {
            auto it = opt->state().find(p->name);
            if (it == opt->state().end()) continue;
            blocks.push_back({p->name + ".Eg2", p->shape, it->second.eg2});
            blocks.push_back({p->name + ".Edx2", p->shape, it->second.edx2});
        }
    }
    return blocks;
}

void restore_params(const std::vector<CheckpointBlock>& blocks,
                    const std::vector<ParamBlock<float>*>& params,
                    Adadelta<float>* opt) {
    std::map<std::string, const CheckpointBlock*> by_name;
    for (const auto& b : blocks) by_name[b.name] = &b;

    for (auto* p : params) {
        auto it = by_name.find(p->name);
        if (it == by_name.end())
            throw IoError("checkpoint is missing parameter block " + p->name);
        if (it->second->values.size() != p->size())
            throw ShapeError("checkpoint block size mismatch for " + p->name);
        p->w = it->second->values;
    }
    if (opt) {
        for (auto* p : params) {
            auto eg = by_name.find(p->name + ".Eg2");
            auto ed = by_name.find(p->name + ".Edx2");
            if (eg == by_name.end() || ed == by_name.end()) continue;
            if (eg->second->values.size() != p->size() ||
                ed->second->values.size() != p->size())
                throw ShapeError("checkpoint accumulator size mismatch for " + p->name);
            auto& st = opt->state()[p->name];
            st.eg2 = eg->second->values;
            st.edx2 = ed->second->values;
        }
    }
}

} // namespace ceph3d
