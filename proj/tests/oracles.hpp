#pragma once

// Independent brute-force reference implementations of the hotspot metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "crimesim/rng.hpp"

namespace oracle {

struct Fixture {
    std::vector<double> sim;
    std::vector<double> real;
    std::vector<std::uint8_t> eligible;
};

/// 5x5 fixture with integer counts in [0, 20], about 80% eligible cells,
/// at least one eligible real crime and one eligible simulated crime.
inline Fixture random_fixture(crimesim::Rng& rng, std::size_t n = 25) {
    for (;;) {
        Fixture f;
        f.sim.resize(n);
        f.real.resize(n);
        f.eligible.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            f.eligible[i] = rng.uniform() < 0.8;
            f.sim[i] = rng.uniform() < 0.3 ? 0.0 : static_cast<double>(rng.index(21));
            f.real[i] = rng.uniform() < 0.3 ? 0.0 : static_cast<double>(rng.index(21));
        }
        double s = 0, r = 0;
        std::size_t e = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (f.eligible[i]) {
                s += f.sim[i];
                r += f.real[i];
                ++e;
            }
        if (s > 0 && r > 0 && e >= 4) return f;
    }
}

inline std::vector<std::size_t> eligible_cells(const Fixture& f) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < f.eligible.size(); ++i)
        if (f.eligible[i]) out.push_back(i);
    return out;
}

inline std::size_t k_for(std::size_t eligible, double coverage) {
    return static_cast<std::size_t>(std::floor(coverage * static_cast<double>(eligible) + 0.5));
}

/// Top-k by repeated linear scans: the highest score, lowest index first.
inline std::vector<std::size_t> top_k(const std::vector<double>& score, const std::vector<std::uint8_t>& eligible,
                                      std::size_t k) {
    std::vector<bool> taken(score.size(), false);
    std::vector<std::size_t> out;
    for (std::size_t round = 0; round < k; ++round) {
        std::size_t best = score.size();
        for (std::size_t i = 0; i < score.size(); ++i) {
            if (!eligible[i] || taken[i]) continue;
            if (best == score.size() || score[i] > score[best]) best = i;
        }
        taken[best] = true;
        out.push_back(best);
    }
    return out;
}

inline double sum_of(const std::vector<double>& v, const std::vector<std::size_t>& cells) {
    double s = 0;
    for (auto c : cells) s += v[c];
    return s;
}

/// Maximum real-crime hits over every k-subset of eligible cells.
inline double best_hits(const Fixture& f, std::size_t k) {
    const auto cells = eligible_cells(f);
    double best = -1;
    std::vector<std::size_t> pick;
    std::function<void(std::size_t, double)> rec = [&](std::size_t start, double acc) {
        if (pick.size() == k) {
            best = std::max(best, acc);
            return;
        }
        for (std::size_t i = start; i + (k - pick.size()) <= cells.size(); ++i) {
            pick.push_back(cells[i]);
            rec(i + 1, acc + f.real[cells[i]]);
            pick.pop_back();
        }
    };
    rec(0, 0.0);
    return best;
}

struct Coverage {
    double pai, pai_star, pei, fai;
};

inline Coverage coverage_metrics(const Fixture& f, double coverage) {
    const auto cells = eligible_cells(f);
    const std::size_t k = k_for(cells.size(), coverage);
    const double area = static_cast<double>(k) / static_cast<double>(cells.size());
    const double n_real_total = sum_of(f.real, cells);
    const double n_sim_total = sum_of(f.sim, cells);
    const auto selected = top_k(f.sim, f.eligible, k);
    Coverage c{};
    c.pai = (sum_of(f.real, selected) / n_real_total) / area;
    c.pai_star = (best_hits(f, k) / n_real_total) / area;
    c.pei = c.pai / c.pai_star;
    c.fai = (sum_of(f.real, selected) / sum_of(f.sim, selected)) / (n_real_total / n_sim_total);
    return c;
}

struct Prf {
    double precision, recall, f;
};

inline Prf prf(const Fixture& f, double threshold) {
    double tp = 0, predicted = 0, actual = 0;
    for (std::size_t i = 0; i < f.sim.size(); ++i) {
        if (!f.eligible[i]) continue;
        const bool p = f.sim[i] >= threshold;
        const bool a = f.real[i] >= threshold;
        predicted += p;
        actual += a;
        tp += p && a;
    }
    Prf r{};
    r.precision = predicted > 0 ? tp / predicted : 0.0;
    r.recall = actual > 0 ? tp / actual : 0.0;
    r.f = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

}  // namespace oracle
