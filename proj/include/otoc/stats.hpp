#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace otoc::stats {

struct MeanVar {
    long long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    void merge(const MeanVar& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        double d = o.mean - mean;
        long long tot = count + o.count;
        mean += d * static_cast<double>(o.count) / static_cast<double>(tot);
        m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) /
                         static_cast<double>(tot);
        count = tot;
    }
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double stderr_mean() const {
        return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
    }
};

// Standard error of the mean from batch means over contiguous chunks.
inline double batch_means_stderr(const std::vector<double>& samples, int n_batches = 20) {
    if (samples.size() < 2) return 0.0;
    n_batches = std::min<int>(n_batches, static_cast<int>(samples.size()));
    std::vector<double> bm;
    std::size_t per = samples.size() / static_cast<std::size_t>(n_batches);
    for (int b = 0; b < n_batches; ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * per;
        std::size_t hi = (b == n_batches - 1) ? samples.size() : lo + per;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += samples[i];
        bm.push_back(s / static_cast<double>(hi - lo));
    }
    MeanVar mv;
    for (double v : bm) mv.add(v);
    return std::sqrt(mv.variance() / static_cast<double>(bm.size()));
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean of empty set");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population standard deviation (1/M normalization).
inline double stdev_of(const std::vector<double>& v) {
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: bad input");
    double mx = mean_of(x), my = mean_of(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

inline std::vector<double> ranks_of(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline double pearson_of(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = mean_of(a), mb = mean_of(b);
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson_of(ranks_of(a), ranks_of(b));
}

// Relative size of downward violations against the total upward travel of a
// sequence expected to be non-decreasing.
inline double isotonic_violation(const std::vector<double>& v) {
    double up = 0.0, down = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        double d = v[i] - v[i - 1];
        if (d >= 0)
            up += d;
        else
            down -= d;
    }
    double total = up + down;
    return total > 0 ? down / total : 0.0;
}

}  // namespace otoc::stats
