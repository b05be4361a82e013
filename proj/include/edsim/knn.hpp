#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "edsim/patient.hpp"

namespace edsim {

/// k-nearest-neighbour admission classifier on (age, arrival_hour).
///
/// Features are z-scored with the training set's mean and population standard
/// deviation unless standardization is switched off. Equal distances keep
/// training order; a tied vote predicts "not admitted".
class KnnClassifier {
public:
    KnnClassifier(std::span<const PatientRecord> train, int k, bool standardize = true) : k_(k) {
        if (train.empty()) throw std::invalid_argument("knn: empty training set");
        if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
        const double n = static_cast<double>(train.size());
        for (const auto& r : train) {
            mean_[0] += r.age;
            mean_[1] += r.arrival_hour;
        }
        mean_[0] /= n;
        mean_[1] /= n;
        for (const auto& r : train) {
            scale_[0] += (r.age - mean_[0]) * (r.age - mean_[0]);
            scale_[1] += (r.arrival_hour - mean_[1]) * (r.arrival_hour - mean_[1]);
        }
        for (double& s : scale_) {
            s = std::sqrt(s / n);
            if (!(s > 0.0) || !standardize) s = 1.0;
        }
        if (!standardize) mean_ = {0.0, 0.0};
        points_.reserve(train.size());
        for (const auto& r : train) points_.push_back({transform(r), r.admitted});
    }

    bool predict(const PatientRecord& query) const {
        const auto q = transform(query);
        std::vector<std::pair<double, std::size_t>> dist(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const double dx = points_[i].x[0] - q[0], dy = points_[i].x[1] - q[1];
            dist[i] = {dx * dx + dy * dy, i};
        }
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        std::size_t yes = 0;
        for (std::size_t i = 0; i < k; ++i) yes += points_[dist[i].second].label ? 1 : 0;
        return 2 * yes > k;
    }

private:
    struct Point {
        std::array<double, 2> x;
        bool label;
    };
    std::array<double, 2> transform(const PatientRecord& r) const {
        return {(r.age - mean_[0]) / scale_[0], (r.arrival_hour - mean_[1]) / scale_[1]};
    }

    int k_;
    std::array<double, 2> mean_{0.0, 0.0};
    std::array<double, 2> scale_{0.0, 0.0};
    std::vector<Point> points_;
};

inline bool knn_predict(std::span<const PatientRecord> train, const PatientRecord& query, int k,
                        bool standardize = true) {
    return KnnClassifier(train, k, standardize).predict(query);
}

}  // namespace edsim
