#ifndef SEMCOM_POWER_ALLOC_HPP
#define SEMCOM_POWER_ALLOC_HPP

#include <span>
#include <vector>

namespace semcom {

/// Weighted packet-error minimization instance for one transmission slot:
/// minimize sum_i w_i * G(P_i) subject to (1/B) sum_i P_i = P_ave, P_i >= 0,
/// where g_i = |h_i|^2 / sigma^2 are the effective channel gains.
struct AllocationProblem {
    std::vector<double> weights;  // w_i >= 0, at least one positive
    std::vector<double> gains;    // g_i >= 0
    double avg_power = 0.0;       // P_ave
    int blocklength = 0;          // D
    double channel_rate = 0.0;    // R_c

    int size() const { return static_cast<int>(weights.size()); }
    void validate() const;
};

struct AllocationResult {
    std::vector<double> powers;
    double objective_surrogate = 0.0;  // sum w_i * G(P_i)
    double objective_rho_hat = 0.0;    // sum w_i * rho_hat(P_i)
    int iterations = 0;
    double residual = 0.0;  // relative budget violation
};

/// Dispersion-one error bound rho_hat(P) = Q( sqrt(D) (log2(1+gP) - R_c) ln 2 ).
double rho_hat(double power, double gain, int blocklength, double channel_rate);

/// Convex envelope of rho_hat: equal to rho_hat where R_c <= log2(1+gP),
/// and the tangent line mu P + tau through (P_tilde, 1/2) elsewhere, with
/// mu = -sqrt(D/2pi) g / 2^{R_c} and tau = 1/2 + sqrt(D/2pi) (2^{R_c}-1) / 2^{R_c}.
double surrogate_g(double power, double gain, int blocklength, double channel_rate);

/// Derivative of the surrogate (equals mu on the linear branch).
double surrogate_g_deriv(double power, double gain, int blocklength,
                         double channel_rate);

/// Tangency point P_tilde = (2^{R_c} - 1) / g where both branches meet.
double p_tilde(double gain, double channel_rate);

/// Linear-branch coefficients of the surrogate.
double surrogate_mu(double gain, int blocklength, double channel_rate);
double surrogate_tau(int blocklength, double channel_rate);

/// Exact minimizer of the surrogate objective via dual bisection on the
/// budget multiplier; each per-packet subproblem has a closed-form root.
/// Throws solver_error when every gain is zero.
AllocationResult solve_semantic_pa(const AllocationProblem& problem,
                                   double tol = 1e-9);

/// Deployed semantic-PA policy: the surrogate solution safeguarded against
/// the equal and water-filling allocations under the true weighted error
/// sum. The surrogate's linear branch can misprice packets whose rate
/// threshold is unreachable within the budget, dumping power where the
/// actual error stays at one; evaluating the three candidates in
/// sum w_i rho_hat and keeping the best removes that failure mode at the
/// cost of two extra objective evaluations.
std::vector<double> semantic_pa_policy(const AllocationProblem& problem);

/// Classic water-filling P_i = max(0, nu - 1/g_i) with total budget B*P_ave.
std::vector<double> waterfill(std::span<const double> gains, double avg_power,
                              int subcarriers);

/// Uniform allocation P_i = P_ave.
std::vector<double> equal_pa(int subcarriers, double avg_power);

/// Exhaustive simplex-grid minimizer of the surrogate objective, B <= 3.
/// Evaluates both objectives at the best grid point.
AllocationResult brute_force_oracle(const AllocationProblem& problem,
                                    double grid_step);

/// Objective helpers shared by solver, oracle, and baseline comparisons.
double weighted_surrogate_objective(const AllocationProblem& problem,
                                    std::span<const double> powers);
double weighted_rho_hat_objective(const AllocationProblem& problem,
                                  std::span<const double> powers);

}  // namespace semcom

#endif
