#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "drfr/model.hpp"
#include "drfr/quartet.hpp"

namespace drfr {

// Combined margin of a quartet: (Phi_a(im,jn) - Phi_a(im,jm)) + (Phi_i(im,jn) - Phi_i(im,in)).
double quartet_margin(const Dataset& dataset, const QuartetIndex& q,
                      const EmbeddingModel& embedding, const DualMetric& metric);

// Online mining: every quartet realisable inside `batch` whose combined margin
// is strictly below the batch mean, in enumerate_quartets order.
std::vector<QuartetIndex> mine_quartets(std::span<const std::size_t> batch,
                                        const Dataset& dataset, const EmbeddingModel& embedding,
                                        const DualMetric& metric);

struct StepInfo {
    int epoch = 0;          // 1-based
    std::size_t batch = 0;  // 0-based within the epoch
    std::size_t mined = 0;
    const Model* model = nullptr;
};

struct TrainConfig {
    Hyperparams hyper;
    // Starting point; when empty, initial_model(dataset, hyper, feature scale) is used.
    std::optional<Model> resume;
    // Keep W fixed (e.g. a PCA embedding) and learn only the metrics.
    bool train_embedding = true;
    // Optimise M_age / M_ind directly and restore PSD-ness with psd_project after each step.
    bool direct_metric = false;
    // Divide each batch gradient by the number of mined quartets.
    bool average_batch = true;
    // Optimise in features divided by feature_scale(dataset), folding the factor back into W.
    bool precondition = true;
    int log_every = 1;
    std::ostream* log = nullptr;  // progress lines: epoch=<e> objective=<v> mined=<q>
    std::function<void(const StepInfo&)> on_step;

    void validate() const;
};

struct TrainReport {
    // objective[0] is the initial value, objective[e] the value after epoch e,
    // both over every quartet and the full graphs.
    std::vector<double> objective;
    // mined[e-1][b]: quartets mined in batch b of epoch e.
    std::vector<std::vector<std::size_t>> mined;
    Model model;
    double seconds = 0.0;
};

// Power of two nearest to the root mean squared pairwise distance of the features.
double feature_scale(const Dataset& dataset);

// Starting model used by fit when no resume model is given: W ~ U[-1/sqrt(D), 1/sqrt(D)] / scale
// (the uniform range applies to features divided by `scale`), identity metrics.
Model initial_model(const Dataset& dataset, const Hyperparams& hyper, double scale = 1.0);

// Mini-batch SGD with momentum on (W, L_age, L_ind). Deterministic in
// (dataset, config). Throws DataError when the dataset has no quartet and
// DivergenceError when the objective stops being finite.
TrainReport fit(const Dataset& dataset, const TrainConfig& config);

}  // namespace drfr
