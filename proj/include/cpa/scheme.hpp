#pragma once

// Feasibility theory for coded polynomial aggregation (CPA).
//
// A CPA scheme encodes K datasets at data points alpha_k, hands coded data
// evaluated at N evaluation points beta_n to N workers, and recovers
// sum_k w_k F(X_k) from the N responses. With P(z) = prod_n (z - beta_n) and
// C = d(K-1) - N + 1, the scheme is exact iff the betas avoid the alphas and
//
//     sum_k w_k P(alpha_k) alpha_k^j = 0   for j = 0 .. C-1.
//
// Writing P's coefficients as c, the constraints become U c = 0 with
// U = V diag(w) A, V[j,k] = alpha_k^j and A[k,n] = alpha_k^n. Construction
// picks c from ker(U) and takes the roots of sum_n c_n z^n as the betas.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpa/numerics.hpp"

namespace cpa {

/// Smallest worker count admitting an exact scheme for generic data points:
/// floor((K-1)/2) + 1 when d == 1, (d-1)(K-1) + 1 when d >= 2.
/// Throws InvalidParams if K < 2 or d < 1.
int min_responses(int K, int d);

/// Worker count needed to recover every F(X_k) individually: d(K-1) + 1.
int individual_threshold(int K, int d);

struct SystemParams {
  int K = 0;
  int d = 0;
  int N = 0;
  CVector w;
  CVector alpha;

  /// d(K-1) - N + 1; zero or negative once N exceeds d(K-1).
  int constraint_count() const noexcept { return d * (K - 1) - N + 1; }
};

/// Throws InvalidParams on bad counts, a near-zero weight, or data points
/// closer than 1e-9 * (1 + max|alpha|).
void validate(const SystemParams& params);

struct ConstraintSystem {
  CMatrix V;  // C x K
  CMatrix A;  // K x (N+1)
  CMatrix U;  // C x (N+1)
  std::vector<CVector> kernel;
};

/// Throws NoConstraints when C <= 0.
ConstraintSystem build_constraint_system(const SystemParams& params);

struct CpaScheme {
  SystemParams params;
  CVector beta;
  Poly P;  // monic, roots beta
  CVector coeff_vector;
};

enum class Verdict {
  Feasible,
  InfeasibleCgeK,
  InfeasibleTrivialKernel,
  IndividualDecodingRegime,
  Undetermined,
  ConditionsViolated,
};

std::string_view to_string(Verdict v);

struct FeasibilityCertificate {
  Verdict verdict = Verdict::Undetermined;
  std::string detail;
  double residual = 0.0;
};

/// Seeded choice of a kernel vector c and its roots. Candidates come from two
/// sources: Gaussian combinations of the kernel basis, and vectors
/// c = coeffs(prod (z - beta_n)) whose roots are refined from points placed
/// next to the data points until the constraints hold. Every candidate must
/// pass check_feasibility; among those, the one that decodes a seeded random
/// probe instance most accurately wins. Drawing stops after 8 refined
/// candidates once the probe error is below 1e-9, and after 256 regardless.
///
/// Throws NoConstraints (C <= 0), InfeasibleCgeK (C >= K),
/// InfeasibleTrivialKernel (ker U = 0) or GenericityExhausted.
CpaScheme construct_evaluation_points(const SystemParams& params, std::uint64_t seed);

/// Builds the scheme for a caller-chosen coefficient vector c (length N+1).
/// Throws NotInKernel, DegenerateLeading, RepeatedRoots, DisjointnessViolated.
CpaScheme scheme_from_coefficients(const SystemParams& params, std::span<const CScalar> c);

/// Evaluation points for N > d(K-1), where any distinct points disjoint from
/// the data points recover every F(X_k) exactly. Exact in theory is not
/// accurate in double precision, so candidates are placed next to the data
/// points (seeded) and the one that best recovers a seeded probe instance is
/// kept. Throws InvalidParams unless N > d(K-1).
CpaScheme individual_decoding_scheme(const SystemParams& params, std::uint64_t seed);

/// Wraps arbitrary evaluation points in a scheme without any feasibility
/// checks, e.g. to study what goes wrong when the constraints do not hold.
CpaScheme scheme_from_points(const SystemParams& params, CVector beta);

/// max_j |sum_k w_k P(alpha_k) alpha_k^j| over j < C, with P from the scheme.
/// Zero when C <= 0.
double orthogonality_residual(const CpaScheme& scheme);

/// max(1, max_j sum_k |w_k| |P(alpha_k)| |alpha_k|^j): the size of the terms
/// that have to cancel. Residual tolerances are relative to this.
double residual_scale(const CpaScheme& scheme);

/// Independent verifier: rebuilds P as prod (z - beta_n) and checks
/// distinctness, disjointness and the orthogonality residual from scratch.
FeasibilityCertificate check_feasibility(const CpaScheme& scheme);

/// Necessity certificate from (K, d, N, alpha, w) alone.
/// Requires N >= 2; returns IndividualDecodingRegime when N > d(K-1).
FeasibilityCertificate infeasibility_certificate(const SystemParams& params);

struct CauchyBinetResult {
  CScalar lhs;
  CScalar rhs;
  bool agree = false;
};

/// det of the first C columns of U against
/// sum over |S| = C of (prod_{k in S} w_k) det(A[S, 0..C-1])^2.
/// Throws TooLarge when C > 6, InvalidParams when C > K or C > N+1.
CauchyBinetResult cauchy_binet_check(const SystemParams& params);

struct ProbeReport {
  int K = 0;
  int d = 0;
  int N = 0;
  int trials = 0;
  int constructed = 0;       // construct_evaluation_points succeeded and verified
  int leading_nonzero = 0;   // first random kernel vector has c_N away from 0
  int disjoint = 0;          // ... and P_form(alpha_k) away from 0 for every k
  int distinct = 0;          // ... and P_form has pairwise distinct roots

  double fraction(int count) const { return trials ? static_cast<double>(count) / trials : 0.0; }
};

/// Monte-Carlo check that random unit-disk data points are generic: for each
/// trial, draws alpha and w, then tests the first random kernel vector against
/// the three genericity conditions and runs the full construction.
/// Throws InvalidRegime unless N* <= N <= d(K-1) and trials >= 1.
ProbeReport genericity_probe(int K, int d, int N, int trials, std::uint64_t seed);

/// Random generic parameters: unit-disk alpha with 1e-3 separation and
/// sample_weights() weights.
SystemParams random_params(int K, int d, int N, std::uint64_t seed);

}  // namespace cpa
