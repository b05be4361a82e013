#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace edsim {

struct ConfusionMatrix {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    std::uint64_t positives() const { return tp + fn; }
    std::uint64_t negatives() const { return tn + fp; }
};

struct Evaluation {
    ConfusionMatrix cm;
    double accuracy = 0.0;
    std::optional<double> sensitivity;  // empty when there are no actual positives
    std::optional<double> specificity;  // empty when there are no actual negatives
};

inline Evaluation evaluate(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::invalid_argument("evaluate: no records");
    Evaluation e;
    e.cm = cm;
    e.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (cm.positives() > 0) e.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(cm.positives());
    if (cm.negatives() > 0) e.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.negatives());
    return e;
}

inline Evaluation evaluate(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
    if (predictions.size() != labels.size()) throw std::invalid_argument("evaluate: length mismatch");
    if (predictions.empty()) throw std::invalid_argument("evaluate: no records");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (predictions[i]) {
            labels[i] ? ++cm.tp : ++cm.fp;
        } else {
            labels[i] ? ++cm.fn : ++cm.tn;
        }
    }
    return evaluate(cm);
}

}  // namespace edsim
