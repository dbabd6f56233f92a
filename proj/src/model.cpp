#include "ceph3d/model.hpp"

#include <algorithm>
#include <cstring>

namespace ceph3d {

ModelConfig ModelConfig::toy() {
    ModelConfig c;
    c.input_dims = {64, 64, 76};
    c.block_channels = {4, 8, 16, 32};
    c.dense_hidden = 512;
    return c;
}

ModelConfig ModelConfig::full() {
    return ModelConfig{};
}

namespace {

void validate_config(const ModelConfig& cfg) {
    if (cfg.block_channels.size() != 4)
        throw ConfigError("block_channels must list exactly four blocks");
    for (int c : cfg.block_channels)
        if (c < 1) throw ConfigError("block channels must be >= 1");
    if (cfg.input_dims.x < 16 || cfg.input_dims.y < 16 || cfg.input_dims.z < 16)
        throw ConfigError("input dims must be >= 16 per axis for four pooling halvings");
    if (cfg.maxout_k < 2) throw ConfigError("maxout_k must be >= 2");
    if (cfg.dense_hidden < 1) throw ConfigError("dense_hidden must be >= 1");
    if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
        throw ConfigError("dropout_rate must be in [0, 1)");
    if (!(cfg.sigma > 0.0)) throw ConfigError("sigma must be positive");

    std::array<bool, kNumLandmarks> seen{};
    for (LandmarkId id : cfg.landmark_order) {
        if (seen[std::size_t(id)]) throw ConfigError("duplicate landmark in head order");
        seen[std::size_t(id)] = true;
    }
}

const char* axis_suffix(int a) {
    return a == 0 ? "x" : (a == 1 ? "y" : "z");
}

} // namespace

template <typename T>
Model<T>::Model(const ModelConfig& cfg) : cfg_(cfg) {
    validate_config(cfg_);
    const Rng root(cfg_.seed);
    const Rng init = root.stream("init");
    const int k = cfg_.maxout_k;

    int in_ch = 1;
    for (int bi = 0; bi < 4; ++bi) {
        const int out_ch = cfg_.block_channels[std::size_t(bi)];
        const std::string base = "block" + std::to_string(bi + 1);
        ConvBlock<T> blk;
        blk.k = k;
        blk.stage1 = Conv3d<T>(base + ".conv1", in_ch, out_ch, {1, 3, 3});
        blk.stage2 = Conv3d<T>(base + ".conv2", out_ch, out_ch, {3, 1, 3});
        blk.stage3 = Conv3d<T>(base + ".conv3", out_ch, k * out_ch, {3, 3, 1});
        blk.stage1.init_weights(init.stream(blk.stage1.W.name));
        blk.stage2.init_weights(init.stream(blk.stage2.W.name));
        blk.stage3.init_weights(init.stream(blk.stage3.W.name));
        blocks_.push_back(std::move(blk));
        in_ch = out_ch;
    }

    fc_ = Dense<T>("fc", int(flat_size()), k * cfg_.dense_hidden);
    fc_.init_weights(init.stream(fc_.W.name));

    for (LandmarkId id : cfg_.landmark_order) {
        const std::string base = "head." + std::string(landmark_name(id));
        const std::array<int, 3> lens{cfg_.input_dims.x, cfg_.input_dims.y,
                                      cfg_.input_dims.z};
        std::array<Dense<T>, 3> axes;
        for (int a = 0; a < 3; ++a) {
            axes[std::size_t(a)] =
                Dense<T>(base + "." + axis_suffix(a), cfg_.dense_hidden, lens[std::size_t(a)]);
            axes[std::size_t(a)].init_weights(init.stream(axes[std::size_t(a)].W.name));
        }
        heads_.emplace(id, std::move(axes));
    }
}

template <typename T>
Vec3i Model<T>::conv_output_dims() const {
    Vec3i d = cfg_.input_dims;
    for (int i = 0; i < 4; ++i) d = {d.x / 2, d.y / 2, d.z / 2};
    return d;
}

template <typename T>
std::size_t Model<T>::flat_size() const {
    const Vec3i d = conv_output_dims();
    return std::size_t(cfg_.block_channels.back()) * std::size_t(d.count());
}

template <typename T>
std::size_t Model<T>::total_logits() const {
    return std::size_t(kNumLandmarks) *
           std::size_t(cfg_.input_dims.x + cfg_.input_dims.y + cfg_.input_dims.z);
}

template <typename T>
void Model<T>::forward(const Volume& input, bool training, Rng* dropout_rng,
                       Workspace<T>& ws) const {
    if (input.dims() != cfg_.input_dims)
        throw ShapeError("input volume dims do not match the model input dims");
    if (!input.normalized())
        throw StateError("model input must be a normalized volume");

    Tensor4<T> x(1, input.dims());
    const auto& src = input.data();
    for (std::size_t i = 0; i < src.size(); ++i) x.data()[i] = T(src[i]);
    forward_tensor(x, training, dropout_rng, ws);
}

template <typename T>
void Model<T>::forward_tensor(const Tensor4<T>& input, bool training, Rng* dropout_rng,
                              Workspace<T>& ws) const {
    ws.blocks.assign(4, {});
    Tensor4<T> cur = input;
    for (int bi = 0; bi < 4; ++bi) {
        auto& tape = ws.blocks[std::size_t(bi)];
        const auto& blk = blocks_[std::size_t(bi)];
        tape.input = std::move(cur);
        tape.s1 = blk.stage1.forward(tape.input);
        tape.s2 = blk.stage2.forward(tape.s1);
        tape.s3 = blk.stage3.forward(tape.s2);
        tape.activated = maxout_forward(tape.s3, blk.k, tape.maxout_winners);
        cur = maxpool2_forward(tape.activated, tape.pool_argmax);
    }

    ws.flat.assign(cur.data(), cur.data() + cur.size());
    if (training && cfg_.dropout_rate > 0.0) {
        if (!dropout_rng)
            throw InvalidArgument("training forward needs a dropout stream");
        ws.dropped = dropout_forward(ws.flat, cfg_.dropout_rate, true, *dropout_rng,
                                     ws.dropout_mask);
    } else {
        ws.dropout_mask.clear();
        ws.dropped = ws.flat;
    }
    ws.fc_pre = fc_.forward(ws.dropped);
    ws.hidden = maxout_vec_forward(ws.fc_pre, cfg_.maxout_k, ws.fc_winners);

    ws.probs.clear();
    for (LandmarkId id : cfg_.landmark_order) {
        const auto& axes = heads_.at(id);
        HeadOutput<T> h;
        h.x = softmax(axes[0].forward(ws.hidden));
        h.y = softmax(axes[1].forward(ws.hidden));
        h.z = softmax(axes[2].forward(ws.hidden));
        ws.probs.emplace(id, std::move(h));
    }
    ws.forward_done = true;
}

template <typename T>
double Model<T>::loss(const Workspace<T>& ws,
                      const std::map<LandmarkId, AxisTarget>& targets) const {
    if (!ws.forward_done) throw StateError("loss requires a completed forward pass");
    double total = 0.0;
    for (const auto& [id, t] : targets) {
        const auto& h = ws.probs.at(id);
        auto to_t = [](const std::vector<double>& v) {
            return std::vector<T>(v.begin(), v.end());
        };
        total += double(cross_entropy(h.x, to_t(t.x)));
        total += double(cross_entropy(h.y, to_t(t.y)));
        total += double(cross_entropy(h.z, to_t(t.z)));
    }
    return total;
}

template <typename T>
void Model<T>::backward(Workspace<T>& ws, const std::map<LandmarkId, AxisTarget>& targets) {
    if (!ws.forward_done) throw StateError("backward before forward");

    std::vector<T> ghidden(ws.hidden.size(), T(0));
    for (const auto& [id, t] : targets) {
        const auto& h = ws.probs.at(id);
        auto& axes = heads_.at(id);
        const std::array<const std::vector<T>*, 3> probs{&h.x, &h.y, &h.z};
        const std::array<const std::vector<double>*, 3> tt{&t.x, &t.y, &t.z};
        for (int a = 0; a < 3; ++a) {
            std::vector<T> target(tt[std::size_t(a)]->begin(), tt[std::size_t(a)]->end());
            const auto glogits =
                softmax_cross_entropy_grad(*probs[std::size_t(a)], target);
            const auto gh = axes[std::size_t(a)].backward(ws.hidden, glogits);
            for (std::size_t i = 0; i < ghidden.size(); ++i) ghidden[i] += gh[i];
        }
    }

    auto gfc_pre = maxout_vec_backward(ghidden, cfg_.maxout_k, ws.fc_winners);
    auto gdropped = fc_.backward(ws.dropped, gfc_pre);
    auto gflat = dropout_backward(gdropped, ws.dropout_mask);

    const Vec3i cd = conv_output_dims();
    Tensor4<T> gcur(cfg_.block_channels.back(), cd);
    std::copy(gflat.begin(), gflat.end(), gcur.data());

    for (int bi = 3; bi >= 0; --bi) {
        auto& tape = ws.blocks[std::size_t(bi)];
        auto& blk = blocks_[std::size_t(bi)];
        auto gact = maxpool2_backward(gcur, tape.pool_argmax, tape.activated.channels(),
                                      tape.activated.dims());
        auto gs3 = maxout_backward(gact, blk.k, tape.maxout_winners);
        auto gs2 = blk.stage3.backward(tape.s2, gs3);
        auto gs1 = blk.stage2.backward(tape.s1, gs2);
        gcur = blk.stage1.backward(tape.input, gs1);
    }
    ws.forward_done = false;
}

template <typename T>
void Model<T>::zero_grads() {
    for (auto* p : param_blocks()) p->zero_grad();
}

template <typename T>
std::vector<ParamBlock<T>*> Model<T>::param_blocks() {
    std::vector<ParamBlock<T>*> out;
    for (auto& blk : blocks_) {
        out.push_back(&blk.stage1.W);
        out.push_back(&blk.stage1.b);
        out.push_back(&blk.stage2.W);
        out.push_back(&blk.stage2.b);
        out.push_back(&blk.stage3.W);
        out.push_back(&blk.stage3.b);
    }
    out.push_back(&fc_.W);
    out.push_back(&fc_.b);
    for (LandmarkId id : cfg_.landmark_order) {
        auto& axes = heads_.at(id);
        for (int a = 0; a < 3; ++a) {
            out.push_back(&axes[std::size_t(a)].W);
            out.push_back(&axes[std::size_t(a)].b);
        }
    }
    return out;
}

template <typename T>
std::vector<const ParamBlock<T>*> Model<T>::param_blocks() const {
    auto blocks = const_cast<Model<T>*>(this)->param_blocks();
    return {blocks.begin(), blocks.end()};
}

template <typename T>
LandmarkSet Model<T>::decode(const Workspace<T>& ws) const {
    if (!ws.forward_done && ws.probs.empty())
        throw StateError("decode requires a completed forward pass");
    LandmarkSet out(Frame::Voxel);
    for (const auto& [id, h] : ws.probs) {
        auto to_d = [](const std::vector<T>& v) {
            return std::vector<double>(v.begin(), v.end());
        };
        const Vec3i idx = decode_prediction(to_d(h.x), to_d(h.y), to_d(h.z));
        out.set(id, {double(idx.x), double(idx.y), double(idx.z)});
    }
    return out;
}

Volume preprocess_volume(const Volume& raw, const ModelConfig& cfg) {
    GridSpec spec;
    spec.target_spacing = cfg.target_spacing;
    spec.target_dims = cfg.input_dims;
    spec.pad_value_hu = cfg.pad_value_hu;
    const Volume iso = resample(raw, spec.target_spacing, spec.pad_value_hu);
    return normalize(pad_to(iso, spec));
}

LandmarkSet predict(const ModelF& model, const Volume& raw) {
    const Volume input = preprocess_volume(raw, model.config());
    Workspace<float> ws;
    model.forward(input, false, nullptr, ws);
    const LandmarkSet voxels = model.decode(ws);
    return landmarks_voxel_to_world(voxels, input);
}

template class Model<float>;
template class Model<double>;

} // namespace ceph3d
