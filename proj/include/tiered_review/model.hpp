#pragma once

// Domain types for the tiered partial-review model.
//
// Indexing convention used throughout: tier 0 is the candidate corpus, tiers
// 1..T are human review stages. Sequences indexed by tier carry T+1 entries
// (lambdas, e) or T entries for tiers 1..T (pis, n), stored 0-based so that
// pis[t-1] and n[t-1] belong to tier t.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tiered_review/distributions.hpp"
#include "tiered_review/errors.hpp"

namespace tiered_review {

struct ReviewConfig {
    double mileage = 1.0;
    std::size_t strata = 1;
    std::size_t tiers = 1;

    void validate() const {
        if (!(mileage > 0.0) || !std::isfinite(mileage)) {
            throw InvalidInput("mileage must be positive and finite");
        }
        if (strata < 1) throw InvalidInput("stratum count must be at least 1");
        if (tiers < 1) throw InvalidInput("tier count must be at least 1");
    }
};

/// Per-stratum Poisson rates (per unit mileage) and tier sampling rates.
struct StratumParams {
    std::vector<double> lambdas;  // lambda_0 .. lambda_T
    std::vector<double> pis;      // pi_1 .. pi_T

    std::size_t tiers() const { return pis.size(); }

    void validate() const {
        if (pis.empty()) throw InvalidInput("stratum needs at least one tier");
        if (lambdas.size() != pis.size() + 1) {
            throw InvalidInput("stratum has " + std::to_string(lambdas.size()) + " rates for " +
                               std::to_string(pis.size()) + " tiers; expected T+1 rates");
        }
        for (double l : lambdas) {
            if (!(l >= 0.0) || !std::isfinite(l)) {
                throw InvalidInput("rates must be finite and non-negative");
            }
        }
        for (double p : pis) {
            if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("sampling rates must lie in (0, 1]");
        }
    }

    /// Lambda_t = sum_{s >= t} lambda_s.
    double cumulative_rate(std::size_t t) const {
        double acc = 0.0;
        for (std::size_t s = t; s < lambdas.size(); ++s) acc += lambdas[s];
        return acc;
    }

    double pi_product() const {
        double acc = 1.0;
        for (double p : pis) acc *= p;
        return acc;
    }
};

struct Scenario {
    ReviewConfig config;
    std::vector<StratumParams> strata;

    void validate() const {
        config.validate();
        if (strata.size() != config.strata) {
            throw InvalidInput("scenario declares H=" + std::to_string(config.strata) + " but has " +
                               std::to_string(strata.size()) + " strata");
        }
        for (std::size_t h = 0; h < strata.size(); ++h) {
            try {
                strata[h].validate();
            } catch (const InvalidInput& err) {
                throw InvalidInput("stratum " + std::to_string(h) + ": " + err.what());
            }
            if (strata[h].tiers() != config.tiers) {
                throw InvalidInput("stratum " + std::to_string(h) + " has " +
                                   std::to_string(strata[h].tiers()) + " tiers, expected T=" +
                                   std::to_string(config.tiers));
            }
        }
    }

    /// theta = sum_h lambda_{hT}.
    double theta() const {
        double acc = 0.0;
        for (const auto& s : strata) acc += s.lambdas.back();
        return acc;
    }

    /// Expected observed true positives per unit mileage,
    /// sum_h lambda_{hT} prod_t pi_{ht}.
    double expected_observed_tp() const {
        double acc = 0.0;
        for (const auto& s : strata) acc += s.lambdas.back() * s.pi_product();
        return acc;
    }
};

/// Lower-triangular latent label counts x_{ts}, 0 <= s <= t <= T. Row t is
/// the label class (FP-(t+1) for t < T, TP for t = T); column s is the
/// escalation set E_s.
class LatentTable {
public:
    LatentTable() = default;
    explicit LatentTable(std::size_t tiers)
        : tiers_(tiers), cells_((tiers + 1) * (tiers + 2) / 2, 0) {}

    std::size_t tiers() const { return tiers_; }

    Count& at(std::size_t t, std::size_t s) { return cells_[index(t, s)]; }
    Count at(std::size_t t, std::size_t s) const { return cells_[index(t, s)]; }

    /// e_s = sum_{t >= s} x_{ts}.
    Count column_sum(std::size_t s) const {
        Count acc = 0;
        for (std::size_t t = s; t <= tiers_; ++t) acc += at(t, s);
        return acc;
    }

    bool all_zero() const {
        for (Count c : cells_) {
            if (c != 0) return false;
        }
        return true;
    }

    friend bool operator==(const LatentTable&, const LatentTable&) = default;

private:
    std::size_t index(std::size_t t, std::size_t s) const {
        if (s > t || t > tiers_) throw std::out_of_range("latent table index outside x_{ts}, s <= t <= T");
        return t * (t + 1) / 2 + s;
    }

    std::size_t tiers_ = 0;
    std::vector<Count> cells_;
};

/// Observed escalation counts e_0..e_T and sample sizes n_1..n_T. Tiers past
/// an early termination hold explicit zeros.
struct ObservedStratum {
    std::vector<Count> e;
    std::vector<Count> n;

    std::size_t tiers() const { return n.size(); }

    friend bool operator==(const ObservedStratum&, const ObservedStratum&) = default;
};

struct Dataset {
    ReviewConfig config;
    std::vector<ObservedStratum> strata;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.config.mileage == b.config.mileage && a.config.strata == b.config.strata &&
               a.config.tiers == b.config.tiers && a.strata == b.strata;
    }
};

struct Validation {
    bool ok = true;
    std::string diagnostic;

    explicit operator bool() const { return ok; }

    static Validation fail(std::string why) { return {false, std::move(why)}; }
};

/// Checks shape, ordering e_t <= n_t <= e_{t-1}, the n_t >= 1 rule and
/// early termination. The diagnostic names the first violated constraint.
inline Validation validate_observed(const ObservedStratum& stratum,
                                    std::optional<std::size_t> expected_tiers = std::nullopt) {
    const std::size_t T = stratum.n.size();
    if (T == 0) return Validation::fail("shape: n must have at least one tier");
    if (stratum.e.size() != T + 1) {
        return Validation::fail("shape: e has " + std::to_string(stratum.e.size()) +
                                " entries, expected T+1 = " + std::to_string(T + 1));
    }
    if (expected_tiers && *expected_tiers != T) {
        return Validation::fail("shape: stratum has " + std::to_string(T) + " tiers, expected " +
                                std::to_string(*expected_tiers));
    }
    if (stratum.e[0] < 0) return Validation::fail("e_0 is negative");
    for (std::size_t t = 1; t <= T; ++t) {
        const Count e_prev = stratum.e[t - 1];
        const Count n_t = stratum.n[t - 1];
        const Count e_t = stratum.e[t];
        const std::string tier = std::to_string(t);
        if (n_t < 0 || e_t < 0) return Validation::fail("tier " + tier + ": negative count");
        if (e_prev == 0) {
            if (n_t != 0 || e_t != 0) {
                return Validation::fail("tier " + tier +
                                        ": review continued after early termination (e_" +
                                        std::to_string(t - 1) + " = 0 requires n_" + tier +
                                        " = e_" + tier + " = 0)");
            }
            continue;
        }
        if (n_t < 1) {
            return Validation::fail("tier " + tier + ": n_" + tier + " must be >= 1 when e_" +
                                    std::to_string(t - 1) + " > 0");
        }
        if (n_t > e_prev) {
            return Validation::fail("tier " + tier + ": n_" + tier + " = " + std::to_string(n_t) +
                                    " exceeds e_" + std::to_string(t - 1) + " = " +
                                    std::to_string(e_prev));
        }
        if (e_t > n_t) {
            return Validation::fail("tier " + tier + ": e_" + tier + " = " + std::to_string(e_t) +
                                    " exceeds n_" + tier + " = " + std::to_string(n_t));
        }
    }
    return {};
}

inline Validation validate_latent(const LatentTable& latent, const ObservedStratum& observed) {
    const std::size_t T = latent.tiers();
    if (observed.e.size() != T + 1) return Validation::fail("latent/observed tier mismatch");
    for (std::size_t s = 0; s <= T; ++s) {
        for (std::size_t t = s; t <= T; ++t) {
            if (latent.at(t, s) < 0) return Validation::fail("negative latent count");
        }
        if (latent.column_sum(s) != observed.e[s]) {
            return Validation::fail("latent column " + std::to_string(s) + " does not sum to e_" +
                                    std::to_string(s));
        }
    }
    if (latent.at(T, T) != observed.e[T]) return Validation::fail("x_TT differs from e_T");
    return {};
}

/// Validates every stratum against the dataset configuration; throws
/// InvalidInput naming the offending stratum.
inline void validate_dataset(const Dataset& data) {
    data.config.validate();
    if (data.strata.size() != data.config.strata) {
        throw InvalidInput("dataset declares H=" + std::to_string(data.config.strata) + " but has " +
                           std::to_string(data.strata.size()) + " strata");
    }
    for (std::size_t h = 0; h < data.strata.size(); ++h) {
        auto v = validate_observed(data.strata[h], data.config.tiers);
        if (!v) throw InvalidInput("stratum " + std::to_string(h) + ": " + v.diagnostic);
    }
}

enum class IntervalMethod { bootstrap, wald, gamma_wsip };

inline const char* to_string(IntervalMethod m) {
    switch (m) {
        case IntervalMethod::bootstrap: return "bootstrap";
        case IntervalMethod::wald: return "wald";
        case IntervalMethod::gamma_wsip: return "gamma";
    }
    return "unknown";
}

inline std::optional<IntervalMethod> parse_method(const std::string& name) {
    if (name == "bootstrap") return IntervalMethod::bootstrap;
    if (name == "wald") return IntervalMethod::wald;
    if (name == "gamma" || name == "gamma_wsip") return IntervalMethod::gamma_wsip;
    return std::nullopt;
}

struct IntervalResult {
    IntervalMethod method = IntervalMethod::gamma_wsip;
    double level = 0.9;
    double lower = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }
    bool covers(double value) const { return lower <= value && value <= upper; }
};

}  // namespace tiered_review
