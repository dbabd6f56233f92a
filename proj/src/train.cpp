#include "ceph3d/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ceph3d/checkpoint.hpp"

namespace ceph3d {

namespace {

struct PreparedSample {
    Volume volume;        // normalized, network grid
    LandmarkSet voxels;   // voxel frame
};

PreparedSample prepare(const TrainSample& s, const ModelConfig& cfg, std::size_t index) {
    if (!s.landmarks.complete())
        throw DataError("training sample " + std::to_string(index) +
                        " has an incomplete landmark set");
    if (s.volume.normalized()) {
        if (s.volume.dims() != cfg.input_dims)
            throw ShapeError("preprocessed training volume does not match input dims");
        if (s.landmarks.frame() != Frame::Voxel)
            throw StateError("preprocessed training samples need voxel-frame landmarks");
        return {s.volume, s.landmarks};
    }
    Volume input = preprocess_volume(s.volume, cfg);
    LandmarkSet voxels = landmarks_world_to_voxel(s.landmarks, input);
    return {std::move(input), std::move(voxels)};
}

double target_entropy(const std::map<LandmarkId, AxisTarget>& targets) {
    double h = 0.0;
    auto axis = [&](const std::vector<double>& t) {
        for (double v : t)
            if (v > 0.0) h -= v * std::log(v);
    };
    for (const auto& [id, t] : targets) {
        axis(t.x);
        axis(t.y);
        axis(t.z);
    }
    return h;
}

double mean_decode_err_mm(const ModelF& model, const Workspace<float>& ws,
                          const LandmarkSet& truth_voxels, double spacing_mm) {
    const LandmarkSet decoded = model.decode(ws);
    double sum = 0.0;
    for (const auto& [id, p] : decoded.points()) {
        const Vec3 d = p - truth_voxels.get(id);
        sum += d.norm() * spacing_mm;
    }
    return sum / double(decoded.size());
}

} // namespace

std::filesystem::path best_checkpoint_path(const std::filesystem::path& final_path) {
    std::filesystem::path p = final_path;
    const std::string ext = p.extension().string();
    p.replace_extension();
    p += ".best";
    p += ext;
    return p;
}

TrainLog train(ModelF& model, const std::vector<TrainSample>& dataset,
               const TrainConfig& tc) {
    if (tc.epochs < 1) throw InvalidArgument("epochs must be >= 1");
    if (tc.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
    if (dataset.empty()) throw InvalidArgument("training dataset is empty");

    const ModelConfig& cfg = model.config();
    std::vector<PreparedSample> prepared;
    prepared.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        prepared.push_back(prepare(dataset[i], cfg, i));

    const Rng root(tc.seed);
    Rng shuffle_rng = root.stream("shuffle");
    Rng dropout_rng = root.stream("dropout");

    Adadelta<float> opt;
    Workspace<float> ws;
    TrainLog log;
    std::vector<float> best_weights;
    const int copies = tc.aug.enabled ? std::max(1, tc.augment_per_sample) : 1;

    std::vector<std::size_t> order(prepared.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    auto params = model.param_blocks();
    auto save_to = [&](const std::filesystem::path& path) {
        std::vector<const ParamBlock<float>*> cparams(params.begin(), params.end());
        save_checkpoint(blocks_from_params(cparams, &opt), path);
    };

    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        // Fisher-Yates; one deterministic draw sequence per epoch.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[std::size_t(shuffle_rng.below(i))]);

        double loss_sum = 0.0, err_sum = 0.0, entropy_sum = 0.0;
        int presented = 0, in_batch = 0;

        auto flush_batch = [&]() {
            if (in_batch == 0) return;
            if (in_batch > 1) {
                const float scale = 1.0f / float(in_batch);
                for (auto* p : params)
                    for (auto& g : p->grad()) g *= scale;
            }
            for (auto* p : params) opt.step(*p);
            model.zero_grads();
            in_batch = 0;
        };

        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const PreparedSample& base = prepared[order[oi]];
            for (int copy = 0; copy < copies; ++copy) {
                const Volume* vol = &base.volume;
                const LandmarkSet* lms = &base.voxels;
                std::optional<AugmentedSample> aug_sample;
                if (tc.aug.enabled) {
                    const std::string stream_name = "aug/e" + std::to_string(epoch) + "/s" +
                                                    std::to_string(order[oi]) + "/c" +
                                                    std::to_string(copy);
                    Rng aug_rng = root.stream(stream_name);
                    for (int attempt = 0; attempt < 100 && !aug_sample; ++attempt) {
                        const AugmentParams p =
                            sample_params(cfg.input_dims, tc.aug, aug_rng);
                        aug_sample =
                            apply_augmentation(base.volume, base.voxels, p, cfg.pad_value_hu);
                    }
                    if (!aug_sample)
                        throw DataError("augmentation kept rejecting sample " +
                                        std::to_string(order[oi]) +
                                        "; landmarks too close to the grid edge");
                    vol = &aug_sample->volume;
                    lms = &aug_sample->landmarks;
                }

                const auto targets = encode_targets(*lms, cfg.input_dims, cfg.sigma);
                model.forward(*vol, true, &dropout_rng, ws);
                const double sample_loss = model.loss(ws, targets);
                if (!std::isfinite(sample_loss))
                    throw DivergedError("non-finite loss at epoch " + std::to_string(epoch));
                loss_sum += sample_loss;
                entropy_sum += target_entropy(targets);
                err_sum += mean_decode_err_mm(model, ws, *lms, cfg.target_spacing);
                ++presented;

                model.backward(ws, targets);
                ++in_batch;
                if (in_batch == tc.batch_size) flush_batch();
            }
        }
        flush_batch();

        EpochStats st;
        st.epoch = epoch;
        st.mean_loss = loss_sum / double(presented);
        st.mean_err_mm = err_sum / double(presented);
        st.mean_target_entropy = entropy_sum / double(presented);
        log.epochs.push_back(st);

        if (log.best_epoch == 0 || st.mean_loss < log.best_loss) {
            log.best_epoch = epoch;
            log.best_loss = st.mean_loss;
            if (!tc.checkpoint_path.empty())
                save_to(best_checkpoint_path(tc.checkpoint_path));
        }
    }

    if (!tc.checkpoint_path.empty()) save_to(tc.checkpoint_path);
    return log;
}

void write_train_log(const TrainLog& log, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    char buf[128];
    for (const auto& e : log.epochs) {
        std::snprintf(buf, sizeof(buf), "%d\t%.9g\t%.9g\n", e.epoch, e.mean_loss,
                      e.mean_err_mm);
        os << buf;
    }
    if (!os) throw IoError("short write: " + path.string());
}

} // namespace ceph3d
