#include "newsent/model.hpp"

#include "newsent/kernels.hpp"
#include "newsent/util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace newsent {

namespace {

// Decoupled weight decay applies to weight matrices only.
bool decays(const std::string& name) {
    auto ends_with = [&name](std::string_view s) {
        return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with(".b") || ends_with(".b1") || ends_with(".b2")) return false;
    if (name.find("gamma") != std::string::npos || name.find("beta") != std::string::npos)
        return false;
    return true;
}

} // namespace

TrainTrace Model::train(const std::vector<LabeledTweet>& train_set) {
    if (train_set.empty()) fail_data("training set is empty");
    const Kernels& K = *kern_;
    fingerprint_ = dataset_fingerprint_of(train_set);

    std::vector<std::vector<int>> encoded(train_set.size());
    for (std::size_t i = 0; i < train_set.size(); ++i)
        encoded[i] = encode_content(train_set[i].text);

    const double lr = tc_.effective_lr();
    const float beta1 = 0.9f, beta2 = 0.999f, adam_eps = 1e-8f;
    const int B = tc_.batch_size;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng order_rng(tc_.seed ^ 0x5DEECE66DULL);

    TrainTrace trace;
    trace.epoch_mean_loss.reserve(static_cast<std::size_t>(tc_.epochs));

    for (int epoch = 0; epoch < tc_.epochs; ++epoch) {
        order_rng.shuffle(order);
        double loss_weighted = 0.0;
        std::size_t elems = 0;

        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(B)) {
            std::size_t n = std::min(static_cast<std::size_t>(B), order.size() - start);
            std::vector<std::vector<int>> ids(n);
            std::vector<LabelVector> targets(n);
            for (std::size_t i = 0; i < n; ++i) {
                ids[i] = encoded[order[start + i]];
                targets[i] = train_set[order[start + i]].labels;
            }

            params_.zero_grad();
            adam_step_ += 1;
            float loss = batch_loss(ids, targets, true, true,
                                    static_cast<std::uint64_t>(adam_step_));
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "non-finite loss (" << loss << ") at epoch " << (epoch + 1) << ", step "
                    << adam_step_ << ", lr " << lr << ", batch rows";
                for (std::size_t i = 0; i < n; ++i) msg << ' ' << order[start + i];
                fail_data(msg.str());
            }

            float c1 = 1.0f - std::pow(beta1, static_cast<float>(adam_step_));
            float c2 = 1.0f - std::pow(beta2, static_cast<float>(adam_step_));
            for (const ParamEntry& e : params_.entries()) {
                float wd = decays(e.name) ? static_cast<float>(tc_.weight_decay) : 0.0f;
                K.adamw_step(params_.w(e.offset), params_.m(e.offset), params_.v(e.offset),
                             params_.g(e.offset), static_cast<int>(e.size),
                             static_cast<float>(lr), beta1, beta2, adam_eps, wd, c1, c2);
            }

            std::size_t batch_elems = n * kNumLabels;
            loss_weighted += static_cast<double>(loss) * static_cast<double>(batch_elems);
            elems += batch_elems;
        }
        trace.epoch_mean_loss.push_back(loss_weighted / static_cast<double>(elems));
    }
    return trace;
}

} // namespace newsent
