#pragma once

// Prediction-accuracy metrics: MSPE, Pearson and rank correlation, R^2,
// Harrell's concordance over cross-family pairs, Mann-Whitney AUC, PPV/NPV.
// All deterministic; no RNG anywhere.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "famcure/special.hpp"

namespace famcure {

struct EvalReport {
    std::optional<double> mspe;
    std::optional<double> pearson_rho;
    std::optional<double> rank_rho;
    std::optional<double> r_squared;
    std::optional<double> harrell_c;
    std::optional<double> auc;
    std::optional<double> ppv;
    std::optional<double> npv;
    std::size_t n_pairs_compared = 0;
};

inline double mspe(std::span<const double> true_r, std::span<const double> pred_r) {
    if (true_r.size() != pred_r.size()) throw std::invalid_argument("mspe: length mismatch");
    if (true_r.empty()) throw std::invalid_argument("mspe: empty input");
    CompensatedSum s;
    for (std::size_t i = 0; i < true_r.size(); ++i) {
        const double d = true_r[i] - pred_r[i];
        s.add(d * d);
    }
    return s.value() / static_cast<double>(true_r.size());
}

inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) return std::nullopt;
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) { ma += a[i]; mb += b[i]; }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

/// Average ranks (1-based, ties averaged).
inline std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline std::optional<double> rank_rho(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("rank_rho: length mismatch");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

/// R^2 of the simple regression of the true values on the predictions,
/// which for one predictor is the squared Pearson correlation.
inline std::optional<double> r_squared(std::span<const double> true_r, std::span<const double> pred_r) {
    if (true_r.size() < 3) return std::nullopt;
    const auto rho = pearson(true_r, pred_r);
    if (!rho) return std::nullopt;
    return (*rho) * (*rho);
}

struct ConcordanceResult {
    std::optional<double> value;
    std::size_t comparable = 0;
};

namespace detail {

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t i) {  // 1-based
        for (; i < tree_.size(); i += i & (~i + 1)) tree_[i] += 1;
    }
    [[nodiscard]] long long prefix(std::size_t i) const {  // count of ranks <= i
        long long s = 0;
        for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<long long> tree_;
};

} // namespace detail

/// Harrell's concordance over ordered cross-family pairs: comparable pairs
/// have x_a > x_b with subject b an event; concordant pairs additionally have
/// pred_a < pred_b. Strict mode credits ties 0, half_ties credits 0.5.
/// Setting cross_family_only = false keeps within-family pairs (diagnostic).
/// Runs in O(n log n) by sweeping event subjects in decreasing time order.
inline ConcordanceResult harrell_c(std::span<const double> pred, std::span<const double> x,
                                   std::span<const int> delta,
                                   std::span<const std::size_t> family_of,
                                   bool half_ties = false, bool cross_family_only = true) {
    const std::size_t n = pred.size();
    if (x.size() != n || delta.size() != n || family_of.size() != n) {
        throw std::invalid_argument("harrell_c: length mismatch");
    }
    // dense 1-based ranks of predictions
    std::vector<double> uniq(pred.begin(), pred.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        rank[i] = static_cast<std::size_t>(
                      std::lower_bound(uniq.begin(), uniq.end(), pred[i]) - uniq.begin()) + 1;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] > x[j]; });

    const std::size_t n_fam = family_of.empty() ? 0 : *std::max_element(family_of.begin(), family_of.end()) + 1;
    std::vector<std::vector<std::size_t>> fam_inserted(cross_family_only ? n_fam : 0);

    detail::Fenwick fen(uniq.size());
    long long inserted = 0;
    double num = 0.0;
    long long den = 0;

    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        // subjects strictly later in time are exactly those already inserted
        for (std::size_t k = i; k <= j; ++k) {
            const std::size_t b = order[k];
            if (delta[b] != 1) continue;
            long long total = inserted;
            long long less = fen.prefix(rank[b] - 1);
            long long eq = fen.prefix(rank[b]) - less;
            if (cross_family_only) {
                for (const std::size_t ra : fam_inserted[family_of[b]]) {
                    --total;
                    if (ra < rank[b]) --less;
                    else if (ra == rank[b]) --eq;
                }
            }
            den += total;
            num += static_cast<double>(less);
            if (half_ties) num += 0.5 * static_cast<double>(eq);
        }
        for (std::size_t k = i; k <= j; ++k) {
            const std::size_t a = order[k];
            fen.add(rank[a]);
            ++inserted;
            if (cross_family_only) fam_inserted[family_of[a]].push_back(rank[a]);
        }
        i = j + 1;
    }

    ConcordanceResult out;
    out.comparable = static_cast<std::size_t>(den);
    if (den > 0) out.value = num / static_cast<double>(den);
    return out;
}

/// Mann-Whitney AUC by rank summation with midrank tie handling.
inline std::optional<double> auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("auc: length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int l : labels) {
        if (l == 1) ++n_pos;
        else if (l == 0) ++n_neg;
        else throw std::invalid_argument("auc: labels must be 0 or 1");
    }
    if (n_pos == 0 || n_neg == 0) return std::nullopt;
    const auto ranks = average_ranks(scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 1) rank_sum += ranks[i];
    }
    const double u = rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct PpvNpv {
    std::optional<double> ppv;
    std::optional<double> npv;
};

inline PpvNpv ppv_npv(std::span<const int> pred_class, std::span<const int> true_class) {
    if (pred_class.size() != true_class.size()) throw std::invalid_argument("ppv_npv: length mismatch");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < pred_class.size(); ++i) {
        if (pred_class[i] == 1) {
            if (true_class[i] == 1) ++tp; else ++fp;
        } else {
            if (true_class[i] == 0) ++tn; else ++fn;
        }
    }
    PpvNpv out;
    if (tp + fp > 0) out.ppv = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tn + fn > 0) out.npv = static_cast<double>(tn) / static_cast<double>(tn + fn);
    return out;
}

} // namespace famcure
