#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "edsim/rng.hpp"

namespace edsim {

// All continuous families are sampled by inverse transform, one uniform per variate.

struct Exponential {
    double mean;
    explicit Exponential(double mean_) : mean(mean_) {
        if (!(mean > 0.0) || !std::isfinite(mean))
            throw std::invalid_argument("Exponential: mean must be > 0");
    }
    double quantile(double u) const { return -mean * std::log1p(-u); }
    double analytic_mean() const { return mean; }
};

struct Uniform {
    double low, high;
    Uniform(double low_, double high_) : low(low_), high(high_) {
        if (!(low <= high) || !std::isfinite(low) || !std::isfinite(high))
            throw std::invalid_argument("Uniform: require low <= high");
    }
    double quantile(double u) const { return low + u * (high - low); }
    double analytic_mean() const { return 0.5 * (low + high); }
};

struct Triangular {
    double low, mode, high;
    Triangular(double low_, double mode_, double high_) : low(low_), mode(mode_), high(high_) {
        if (!(low <= mode && mode <= high) || !std::isfinite(low) || !std::isfinite(high))
            throw std::invalid_argument("Triangular: require low <= mode <= high");
    }
    double quantile(double u) const {
        const double width = high - low;
        if (width == 0.0) return low;
        const double f_mode = (mode - low) / width;
        if (u < f_mode) return low + std::sqrt(u * width * (mode - low));
        return high - std::sqrt((1.0 - u) * width * (high - mode));
    }
    double analytic_mean() const { return (low + mode + high) / 3.0; }
};

struct Bernoulli {
    double p;
    explicit Bernoulli(double p_) : p(p_) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("Bernoulli: p must lie in [0,1]");
    }
    // u < p maps to 1, so p = 0 never fires and p = 1 always does.
    double quantile(double u) const { return u < p ? 1.0 : 0.0; }
    double analytic_mean() const { return p; }
};

/// Discrete distribution over labels 0..k-1; weights are normalized on construction.
struct Categorical {
    std::vector<std::string> labels;
    std::vector<double> weights;
    std::vector<double> cumulative;

    Categorical(std::vector<std::string> labels_, std::vector<double> weights_)
        : labels(std::move(labels_)), weights(std::move(weights_)) {
        if (labels.empty() || labels.size() != weights.size())
            throw std::invalid_argument("Categorical: labels and weights must be nonempty and equal length");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("Categorical: negative weight");
            total += w;
        }
        if (!(total > 0.0)) throw std::invalid_argument("Categorical: weights sum to zero");
        cumulative.resize(weights.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            weights[i] /= total;
            acc += weights[i];
            cumulative[i] = acc;
        }
        cumulative.back() = 1.0;
    }

    std::size_t index_for(double u) const {
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto idx = static_cast<std::size_t>(it - cumulative.begin());
        // Zero-weight trailing labels can never be selected.
        std::size_t i = std::min(idx, cumulative.size() - 1);
        while (weights[i] == 0.0 && i > 0) --i;
        return i;
    }
    double quantile(double u) const { return static_cast<double>(index_for(u)); }
    double analytic_mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) m += static_cast<double>(i) * weights[i];
        return m;
    }
};

using DistributionSpec = std::variant<Exponential, Uniform, Triangular, Bernoulli, Categorical>;

inline double quantile(const DistributionSpec& spec, double u) {
    return std::visit([u](const auto& d) { return d.quantile(u); }, spec);
}

/// One variate; consumes exactly one uniform01 from the stream for every kind.
inline double sample(const DistributionSpec& spec, RandomStream& stream) {
    return quantile(spec, stream.uniform01());
}

inline double analytic_mean(const DistributionSpec& spec) {
    return std::visit([](const auto& d) { return d.analytic_mean(); }, spec);
}

inline std::string describe(const DistributionSpec& spec) {
    struct Visitor {
        std::string operator()(const Exponential& d) const { return "Exponential(" + fmt(d.mean) + ")"; }
        std::string operator()(const Uniform& d) const {
            return "Uniform(" + fmt(d.low) + "," + fmt(d.high) + ")";
        }
        std::string operator()(const Triangular& d) const {
            return "Triangular(" + fmt(d.low) + "," + fmt(d.mode) + "," + fmt(d.high) + ")";
        }
        std::string operator()(const Bernoulli& d) const { return "Bernoulli(" + fmt(d.p) + ")"; }
        std::string operator()(const Categorical& d) const {
            return "Categorical(" + std::to_string(d.labels.size()) + ")";
        }
        static std::string fmt(double x) {
            std::string s = std::to_string(x);
            s.erase(s.find_last_not_of('0') + 1);
            if (!s.empty() && s.back() == '.') s.pop_back();
            return s;
        }
    };
    return std::visit(Visitor{}, spec);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
}
inline double normal_quantile(double p) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

/// Normal(location, scale) restricted to [low, high], sampled by inverse transform.
struct TruncatedNormal {
    double location, scale, low, high;

    TruncatedNormal(double location_, double scale_, double low_, double high_)
        : location(location_), scale(scale_), low(low_), high(high_) {
        if (!(scale > 0.0) || !(low < high))
            throw std::invalid_argument("TruncatedNormal: require scale > 0 and low < high");
        if (!(mass() > 0.0)) throw std::invalid_argument("TruncatedNormal: no mass inside bounds");
    }

    double alpha() const { return (low - location) / scale; }
    double beta() const { return (high - location) / scale; }
    double mass() const { return normal_cdf(beta()) - normal_cdf(alpha()); }

    double cdf(double x) const {
        if (x <= low) return 0.0;
        if (x >= high) return 1.0;
        return (normal_cdf((x - location) / scale) - normal_cdf(alpha())) / mass();
    }

    double quantile(double u) const {
        const double p = normal_cdf(alpha()) + u * mass();
        return std::clamp(location + scale * normal_quantile(p), low, high);
    }

    double mean() const {
        return location + scale * (normal_pdf(alpha()) - normal_pdf(beta())) / mass();
    }

    double stddev() const {
        const double a = alpha(), b = beta(), z = mass();
        const double t1 = (a * normal_pdf(a) - b * normal_pdf(b)) / z;
        const double t2 = (normal_pdf(a) - normal_pdf(b)) / z;
        return scale * std::sqrt(1.0 + t1 - t2 * t2);
    }

    double sample(RandomStream& stream) const { return quantile(stream.uniform01()); }

    /// Finds the untruncated (location, scale) whose truncation to [low, high]
    /// has the requested mean and standard deviation (damped Newton on two
    /// equations, Jacobian by central differences).
    static TruncatedNormal with_moments(double target_mean, double target_sd, double low, double high) {
        if (!(target_mean > low && target_mean < high) || !(target_sd > 0.0))
            throw std::invalid_argument("TruncatedNormal: target moments outside support");
        double mu = target_mean, sigma = target_sd;
        auto residual = [&](double m, double s) {
            TruncatedNormal t(m, s, low, high);
            return std::pair{t.mean() - target_mean, t.stddev() - target_sd};
        };
        for (int iter = 0; iter < 200; ++iter) {
            auto [f1, f2] = residual(mu, sigma);
            if (std::abs(f1) < 1e-10 && std::abs(f2) < 1e-10) break;
            const double h = 1e-5 * std::max(1.0, sigma);
            auto [a1, a2] = residual(mu + h, sigma);
            auto [b1, b2] = residual(mu - h, sigma);
            auto [c1, c2] = residual(mu, sigma + h);
            auto [d1, d2] = residual(mu, sigma - h);
            const double j11 = (a1 - b1) / (2 * h), j21 = (a2 - b2) / (2 * h);
            const double j12 = (c1 - d1) / (2 * h), j22 = (c2 - d2) / (2 * h);
            const double det = j11 * j22 - j12 * j21;
            if (det == 0.0) break;
            double dmu = (f1 * j22 - f2 * j12) / det;
            double dsigma = (j11 * f2 - j21 * f1) / det;
            double step = 1.0;
            while (sigma - step * dsigma <= 0.0) step *= 0.5;
            mu -= step * dmu;
            sigma -= step * dsigma;
        }
        TruncatedNormal out(mu, sigma, low, high);
        if (std::abs(out.mean() - target_mean) > 1e-6 || std::abs(out.stddev() - target_sd) > 1e-6)
            throw std::invalid_argument("TruncatedNormal: requested moments are not attainable");
        return out;
    }
};

}  // namespace edsim
