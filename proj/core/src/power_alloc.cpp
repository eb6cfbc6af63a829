#include "semcom/power_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semcom/errors.hpp"
#include "semcom/link.hpp"

namespace semcom {

namespace {
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kTwoPi = 6.2831853071795864769;
}  // namespace

void AllocationProblem::validate() const {
    if (weights.empty() || weights.size() != gains.size())
        throw config_error("AllocationProblem: weight/gain lengths must match");
    bool any_weight = false;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw config_error("AllocationProblem: weights must be finite and >= 0");
        any_weight = any_weight || w > 0.0;
    }
    if (!any_weight)
        throw config_error("AllocationProblem: at least one weight must be positive");
    for (double g : gains)
        if (!(g >= 0.0) || !std::isfinite(g))
            throw config_error("AllocationProblem: gains must be finite and >= 0");
    if (!(avg_power > 0.0))
        throw config_error("AllocationProblem: power budget must be positive");
    if (blocklength < 1)
        throw config_error("AllocationProblem: blocklength must be >= 1");
    if (!(channel_rate > 0.0) || channel_rate > 1.0)
        throw config_error("AllocationProblem: channel rate must be in (0, 1]");
}

double rho_hat(double power, double gain, int blocklength, double channel_rate) {
    const double z = std::sqrt(static_cast<double>(blocklength)) *
                     (std::log2(1.0 + gain * power) - channel_rate) * kLn2;
    return q_function(z);
}

double p_tilde(double gain, double channel_rate) {
    return (std::exp2(channel_rate) - 1.0) / gain;
}

double surrogate_mu(double gain, int blocklength, double channel_rate) {
    return -std::sqrt(blocklength / kTwoPi) * gain / std::exp2(channel_rate);
}

double surrogate_tau(int blocklength, double channel_rate) {
    const double r = std::exp2(channel_rate);
    return 0.5 + std::sqrt(blocklength / kTwoPi) * (r - 1.0) / r;
}

double surrogate_g(double power, double gain, int blocklength, double channel_rate) {
    if (std::log2(1.0 + gain * power) >= channel_rate)
        return rho_hat(power, gain, blocklength, channel_rate);
    return surrogate_mu(gain, blocklength, channel_rate) * power +
           surrogate_tau(blocklength, channel_rate);
}

double surrogate_g_deriv(double power, double gain, int blocklength,
                         double channel_rate) {
    const double c = std::log2(1.0 + gain * power);
    if (c < channel_rate) return surrogate_mu(gain, blocklength, channel_rate);
    const double sqrt_d = std::sqrt(static_cast<double>(blocklength));
    const double z = sqrt_d * (c - channel_rate) * kLn2;
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(kTwoPi);
    return -phi * sqrt_d * gain / (1.0 + gain * power);
}

double weighted_surrogate_objective(const AllocationProblem& p,
                                    std::span<const double> powers) {
    double obj = 0.0;
    for (int i = 0; i < p.size(); ++i)
        obj += p.weights[i] *
               surrogate_g(powers[i], p.gains[i], p.blocklength, p.channel_rate);
    return obj;
}

double weighted_rho_hat_objective(const AllocationProblem& p,
                                  std::span<const double> powers) {
    double obj = 0.0;
    for (int i = 0; i < p.size(); ++i)
        obj += p.weights[i] *
               rho_hat(powers[i], p.gains[i], p.blocklength, p.channel_rate);
    return obj;
}

namespace {

// Stationarity root of w*G'(P) + lambda = 0 on the convex branch. With
// z = sqrt(D)(ln(1+gP) - R_c ln 2) the condition w*|rho_hat'(P)| = lambda
// reduces to z^2/2 + z/sqrt(D) = beta where beta = ln(lambda_max/lambda)
// and lambda_max = w*|mu|, hence the closed form below. The multiplier is
// handled in log space throughout: beta grows like D*ln^2(gP)/2, so lambda
// itself would underflow at moderate budgets.
double packet_power_at_beta(double beta, double gain, double sqrt_d,
                            double rate_pow2) {
    if (beta <= 0.0) return 0.0;
    const double inv_sd = 1.0 / sqrt_d;
    const double z = -inv_sd + std::sqrt(inv_sd * inv_sd + 2.0 * beta);
    return (rate_pow2 * std::exp(z * inv_sd) - 1.0) / gain;
}

}  // namespace

AllocationResult solve_semantic_pa(const AllocationProblem& problem, double tol) {
    problem.validate();
    const int b = problem.size();
    const double budget = problem.avg_power * b;
    const double sqrt_d = std::sqrt(static_cast<double>(problem.blocklength));
    const double rate_pow2 = std::exp2(problem.channel_rate);

    AllocationResult res;
    res.powers.assign(b, 0.0);

    bool any_gain = false;
    for (double g : problem.gains) any_gain = any_gain || g > 0.0;
    if (!any_gain)
        throw solver_error("solve_semantic_pa: every gain is zero, no usable signal");

    // Packets that influence the objective through their power.
    std::vector<int> active;
    std::vector<double> log_lambda_max(b, 0.0);
    const double log_mu_scale =
        0.5 * std::log(problem.blocklength / kTwoPi) - problem.channel_rate * kLn2;
    for (int i = 0; i < b; ++i) {
        if (problem.weights[i] > 0.0 && problem.gains[i] > 0.0) {
            active.push_back(i);
            log_lambda_max[i] = std::log(problem.weights[i]) +
                                std::log(problem.gains[i]) + log_mu_scale;
        }
    }

    if (active.empty()) {
        // Objective is flat in every coordinate; return the uniform point.
        std::fill(res.powers.begin(), res.powers.end(), problem.avg_power);
        res.objective_surrogate = weighted_surrogate_objective(problem, res.powers);
        res.objective_rho_hat = weighted_rho_hat_objective(problem, res.powers);
        return res;
    }

    const auto supply = [&](double log_lambda) {
        double total = 0.0;
        for (int i : active)
            total += packet_power_at_beta(log_lambda_max[i] - log_lambda,
                                          problem.gains[i], sqrt_d, rate_pow2);
        return total;
    };

    double hi = log_lambda_max[active[0]];
    for (int i : active) hi = std::max(hi, log_lambda_max[i]);
    double lo = hi;
    int iters = 0;
    for (double off = 1.0; supply(lo) < budget; off *= 2.0) {
        lo = hi - off;
        if (++iters > 200)
            throw solver_error("solve_semantic_pa: failed to bracket the multiplier");
    }
    // supply(lo) >= budget > supply(hi); supply is nonincreasing in log_lambda.
    for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++k) {
        const double mid = 0.5 * (lo + hi);
        if (supply(mid) >= budget)
            lo = mid;
        else
            hi = mid;
        ++iters;
    }

    double allocated = 0.0;
    for (int i : active) {
        res.powers[i] = packet_power_at_beta(log_lambda_max[i] - hi,
                                             problem.gains[i], sqrt_d, rate_pow2);
        allocated += res.powers[i];
    }

    // Packets whose threshold sits inside the final bracket are on the flat
    // linear branch: any power in [0, p_tilde] is stationary, so spread the
    // remaining budget over them proportionally to p_tilde.
    double deficit = budget - allocated;
    if (deficit > 0.0) {
        const double width = hi - lo;
        std::vector<int> flat;
        double flat_capacity = 0.0;
        for (int i : active)
            if (res.powers[i] == 0.0 && log_lambda_max[i] > lo - width - 1e-12) {
                flat.push_back(i);
                flat_capacity += p_tilde(problem.gains[i], problem.channel_rate);
            }
        if (!flat.empty() && flat_capacity > 0.0) {
            const double share = std::min(1.0, deficit / flat_capacity);
            for (int i : flat)
                res.powers[i] =
                    share * p_tilde(problem.gains[i], problem.channel_rate);
        }
    }

    // Exact budget equality; the correction is within bisection tolerance.
    double total = 0.0;
    for (double p : res.powers) total += p;
    if (total > 0.0 && std::abs(total - budget) > 0.0) {
        const double scale = budget / total;
        for (double& p : res.powers) p *= scale;
        total = budget;
    }

    res.iterations = iters;
    res.residual = std::abs(total - budget) / budget;
    if (res.residual > tol)
        throw solver_error("solve_semantic_pa: budget residual above tolerance");
    res.objective_surrogate = weighted_surrogate_objective(problem, res.powers);
    res.objective_rho_hat = weighted_rho_hat_objective(problem, res.powers);
    return res;
}

std::vector<double> semantic_pa_policy(const AllocationProblem& problem) {
    AllocationResult surrogate = solve_semantic_pa(problem);
    std::vector<double> best = std::move(surrogate.powers);
    double best_obj = surrogate.objective_rho_hat;
    const auto consider = [&](std::vector<double> cand) {
        const double obj = weighted_rho_hat_objective(problem, cand);
        if (obj < best_obj) {
            best_obj = obj;
            best = std::move(cand);
        }
    };
    consider(equal_pa(problem.size(), problem.avg_power));
    consider(waterfill(problem.gains, problem.avg_power, problem.size()));
    return best;
}

std::vector<double> waterfill(std::span<const double> gains, double avg_power,
                              int subcarriers) {
    if (static_cast<int>(gains.size()) != subcarriers)
        throw config_error("waterfill: gain count must equal subcarriers");
    if (!(avg_power > 0.0))
        throw config_error("waterfill: power budget must be positive");
    const double budget = avg_power * subcarriers;
    double max_inv = 0.0;
    bool any = false;
    for (double g : gains) {
        if (g < 0.0 || !std::isfinite(g))
            throw config_error("waterfill: gains must be finite and >= 0");
        if (g > 0.0) {
            any = true;
            max_inv = std::max(max_inv, 1.0 / g);
        }
    }
    if (!any) throw solver_error("waterfill: every gain is zero, no usable signal");

    const auto supply = [&](double nu) {
        double total = 0.0;
        for (double g : gains)
            if (g > 0.0) total += std::max(0.0, nu - 1.0 / g);
        return total;
    };

    double lo = 0.0, hi = max_inv + budget;
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (supply(mid) < budget)
            lo = mid;
        else
            hi = mid;
    }

    // Close the water level exactly over the active set found by bisection,
    // re-deriving the set until it is stable under its own level.
    double nu = hi;
    for (int pass = 0; pass < subcarriers + 1; ++pass) {
        double inv_sum = 0.0;
        int n_active = 0;
        for (double g : gains)
            if (g > 0.0 && nu - 1.0 / g > 0.0) {
                inv_sum += 1.0 / g;
                ++n_active;
            }
        if (n_active == 0) break;
        const double nu_next = (budget + inv_sum) / n_active;
        if (nu_next == nu) break;
        nu = nu_next;
    }

    std::vector<double> powers(gains.size(), 0.0);
    for (std::size_t i = 0; i < gains.size(); ++i)
        if (gains[i] > 0.0) powers[i] = std::max(0.0, nu - 1.0 / gains[i]);
    return powers;
}

std::vector<double> equal_pa(int subcarriers, double avg_power) {
    if (subcarriers < 1) throw config_error("equal_pa: subcarriers must be >= 1");
    if (!(avg_power > 0.0)) throw config_error("equal_pa: power must be positive");
    return std::vector<double>(subcarriers, avg_power);
}

AllocationResult brute_force_oracle(const AllocationProblem& problem,
                                    double grid_step) {
    problem.validate();
    if (problem.size() > 3)
        throw config_error("brute_force_oracle: only B <= 3 is supported");
    if (!(grid_step > 0.0))
        throw config_error("brute_force_oracle: grid step must be positive");

    const int b = problem.size();
    const double budget = problem.avg_power * b;
    AllocationResult best;
    best.objective_surrogate = std::numeric_limits<double>::infinity();
    int evals = 0;

    const auto consider = [&](const std::vector<double>& powers) {
        const double obj = weighted_surrogate_objective(problem, powers);
        ++evals;
        if (obj < best.objective_surrogate) {
            best.objective_surrogate = obj;
            best.powers = powers;
        }
    };

    const int steps = static_cast<int>(std::floor(budget / grid_step));
    if (b == 1) {
        consider({budget});
    } else if (b == 2) {
        std::vector<double> p(2);
        for (int k = 0; k <= steps; ++k) {
            p[0] = std::min(budget, k * grid_step);
            p[1] = budget - p[0];
            consider(p);
        }
        consider({budget, 0.0});
    } else {
        std::vector<double> p(3);
        for (int k1 = 0; k1 <= steps; ++k1) {
            p[0] = std::min(budget, k1 * grid_step);
            const double rest = budget - p[0];
            const int steps2 = static_cast<int>(std::floor(rest / grid_step));
            for (int k2 = 0; k2 <= steps2; ++k2) {
                p[1] = std::min(rest, k2 * grid_step);
                p[2] = rest - p[1];
                consider(p);
            }
        }
    }

    best.iterations = evals;
    best.objective_rho_hat = weighted_rho_hat_objective(problem, best.powers);
    double total = 0.0;
    for (double v : best.powers) total += v;
    best.residual = std::abs(total - budget) / budget;
    return best;
}

}  // namespace semcom
