#ifndef MIC_MIXER_HPP
#define MIC_MIXER_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mic/errors.hpp"
#include "mic/rng.hpp"

namespace mic {

/// Sampling weights proportional to the square root of each dataset's size:
/// p_d = sqrt(N_d) / sum_i sqrt(N_i).
inline std::vector<double> compute_weights(const std::vector<std::uint64_t>& counts) {
    if (counts.empty()) throw error(errc::empty_plan, "no datasets");
    std::vector<double> roots(counts.size());
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) throw error(errc::zero_count, "dataset " + std::to_string(i) + " is empty");
        roots[i] = std::sqrt(static_cast<double>(counts[i]));
        total += roots[i];
    }
    for (auto& r : roots) r /= total;
    return roots;
}

/// round(total * fraction), clamped to at least 1.
inline std::uint64_t budget_from_fraction(std::uint64_t total, double fraction) {
    auto v = static_cast<std::uint64_t>(std::llround(static_cast<double>(total) * fraction));
    return v == 0 ? 1 : v;
}

struct mix_dataset {
    std::string name;
    std::uint64_t count = 0;       // N_d
    bool no_exemplars = false;
    std::uint32_t n_shots = 4;
};

/// The resolved sampling plan for one corpus build.
struct mix_plan {
    std::vector<mix_dataset> datasets;
    std::vector<double> probabilities;  // p_d, same order as datasets
    std::uint64_t budget = 0;
    std::uint64_t seed = 0;
};

inline mix_plan make_mix_plan(std::vector<mix_dataset> datasets, std::uint64_t budget,
                              std::uint64_t seed) {
    mix_plan plan;
    plan.datasets = std::move(datasets);
    std::vector<std::uint64_t> counts;
    counts.reserve(plan.datasets.size());
    for (const auto& d : plan.datasets) counts.push_back(d.count);
    plan.probabilities = compute_weights(counts);
    plan.budget = budget;
    plan.seed = seed;
    return plan;
}

inline std::vector<violation> validate(const mix_plan& plan) {
    std::vector<violation> out;
    if (plan.datasets.empty()) out.push_back({"plan", "no datasets"});
    if (plan.budget == 0) out.push_back({"plan.budget", "must be positive"});
    if (plan.probabilities.size() != plan.datasets.size()) {
        out.push_back({"plan.probabilities", "size mismatch"});
        return out;
    }
    long double root_sum = 0.0L;
    for (const auto& d : plan.datasets) {
        if (d.count == 0) out.push_back({"plan[" + d.name + "]", "count must be positive"});
        root_sum += std::sqrt(static_cast<long double>(d.count));
    }
    double p_sum = 0.0;
    for (std::size_t i = 0; i < plan.datasets.size(); ++i) {
        const double p = plan.probabilities[i];
        p_sum += p;
        if (root_sum > 0.0L) {
            const long double want =
                std::sqrt(static_cast<long double>(plan.datasets[i].count)) / root_sum;
            const long double rel = std::fabs((static_cast<long double>(p) - want) / want);
            if (rel > 1e-12L)
                out.push_back({"plan.probabilities[" + std::to_string(i) + "]",
                               "deviates from sqrt weighting"});
        }
    }
    if (!plan.datasets.empty() && std::fabs(p_sum - 1.0) > 1e-9)
        out.push_back({"plan.probabilities", "must sum to 1"});
    return out;
}

/// Deterministic draw sequence over a plan: each step picks a dataset by
/// inverse-CDF categorical sampling over p_d, then takes the next index from
/// that dataset's shuffled stream. Streams cycle with a fresh Fisher-Yates
/// shuffle per cycle, so the categorical distribution holds for the whole
/// budget no matter how small a dataset is.
class mix_stream {
public:
    struct draw {
        std::size_t dataset;
        std::size_t record;
    };

    explicit mix_stream(mix_plan plan) : plan_(std::move(plan)), pick_(subrng(plan_.seed, "mix")) {
        cdf_.reserve(plan_.probabilities.size());
        double acc = 0.0;
        for (double p : plan_.probabilities) {
            acc += p;
            cdf_.push_back(acc);
        }
        if (!cdf_.empty()) cdf_.back() = 1.0;
        cursors_.resize(plan_.datasets.size());
        for (std::size_t i = 0; i < cursors_.size(); ++i) reshuffle(i);
    }

    /// Next draw, or nullopt once the budget is spent.
    std::optional<draw> next() {
        if (emitted_ == plan_.budget) return std::nullopt;
        ++emitted_;
        const double u = pick_.unit();
        std::size_t ds = 0;
        while (ds + 1 < cdf_.size() && u >= cdf_[ds]) ++ds;
        auto& cur = cursors_[ds];
        if (cur.pos == cur.perm.size()) {
            ++cur.cycle;
            reshuffle(ds);
        }
        return draw{ds, cur.perm[cur.pos++]};
    }

    std::uint64_t emitted() const { return emitted_; }

private:
    struct cursor {
        std::vector<std::uint32_t> perm;
        std::size_t pos = 0;
        std::uint64_t cycle = 0;
    };

    void reshuffle(std::size_t ds) {
        auto& cur = cursors_[ds];
        const auto n = static_cast<std::uint32_t>(plan_.datasets[ds].count);
        cur.perm.resize(n);
        std::iota(cur.perm.begin(), cur.perm.end(), 0u);
        rng g = subrng(plan_.seed, "shuffle", plan_.datasets[ds].name, cur.cycle);
        shuffle(cur.perm, g);
        cur.pos = 0;
    }

    mix_plan plan_;
    std::vector<double> cdf_;
    std::vector<cursor> cursors_;
    rng pick_;
    std::uint64_t emitted_ = 0;
};

}  // namespace mic

#endif  // MIC_MIXER_HPP
