#pragma once

// Encode / compute / decode for CPA, applied entry-wise to q x v matrices.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cpa/numerics.hpp"
#include "cpa/random.hpp"
#include "cpa/scheme.hpp"

namespace cpa {

struct Dataset {
  std::vector<CMatrix> matrices;

  std::size_t K() const noexcept { return matrices.size(); }
  std::size_t q() const noexcept { return matrices.empty() ? 0 : matrices.front().rows(); }
  std::size_t v() const noexcept { return matrices.empty() ? 0 : matrices.front().cols(); }
};

/// Element-wise polynomial task F.
struct TaskSpec {
  Poly F;

  int degree() const noexcept { return F.degree(); }
  CMatrix apply(const CMatrix& x) const;
};

struct EncodedShare {
  std::size_t worker_index = 0;
  CScalar point;
  CMatrix payload;
};

struct WorkerResponse {
  std::size_t worker_index = 0;
  CMatrix payload;
};

enum class DecodeMethod { CPA, IndividualDecoding };

struct AggregateResult {
  CMatrix Y_hat;
  DecodeMethod method = DecodeMethod::CPA;
};

/// sum_k w_k F(X_k) by direct evaluation. Throws DimensionMismatch.
CMatrix ground_truth(const Dataset& data, const TaskSpec& task, std::span<const CScalar> w);

/// One share per evaluation point: E(beta_n), where E interpolates
/// (alpha_k, X_k) entry by entry. Throws DimensionMismatch.
std::vector<EncodedShare> encode(const Dataset& data, const CpaScheme& scheme);

WorkerResponse worker_compute(const EncodedShare& share, const TaskSpec& task);

/// Entry-wise decoder polynomials D through (beta_n, response_n) in
/// coefficient form, row-major over the q x v entries. For inspection only:
/// decoding evaluates D from the point values, since the monomial
/// coefficients lose too much precision once d(K-1) gets large. Responses
/// must already be complete and ordered by worker index.
std::vector<Poly> interpolate_decoder(std::span<const WorkerResponse> responses, std::span<const CScalar> beta);

enum class Validation { Required, Skip };

/// sum_k w_k D(alpha_k). Responses may arrive in any order; they are sorted
/// by worker index before interpolation so the floating-point reduction order
/// is fixed.
///
/// Throws MissingResponses unless there is exactly one response per worker,
/// and SchemeNotValidated (with Validation::Required) unless check_feasibility
/// reports Feasible or IndividualDecodingRegime.
AggregateResult decode_cpa(std::vector<WorkerResponse> responses, const CpaScheme& scheme,
                           Validation validation = Validation::Required);

struct IndividualDecodeResult {
  std::vector<CMatrix> per_dataset;  // recovered F(X_k)
  AggregateResult aggregate;
};

/// Baseline that recovers every F(X_k) = D(alpha_k) before aggregating.
/// Throws InsufficientResponses when N <= d(K-1).
IndividualDecodeResult decode_individual(std::vector<WorkerResponse> responses, std::span<const CScalar> beta,
                                         const SystemParams& params);

struct ErrorPolyReport {
  Poly delta;                  // D - F(E)
  int degree_bound = 0;        // d(K-1)
  double remainder_norm = 0;   // max|rem| / max(1, max|delta|) after dividing by P
  double aggregate_error = 0;  // |sum_k w_k delta(alpha_k)| / max(1, sum_k |w_k delta(alpha_k)|)

  bool degree_ok() const noexcept { return delta.degree() <= degree_bound; }
};

/// Scalar-data diagnostic: the decoding error polynomial vanishes on every
/// beta_n, so P divides it, and its weighted sum over the alphas is the
/// recovery error. Throws NonScalarData unless q = v = 1.
ErrorPolyReport error_polynomial_check(const CpaScheme& scheme, const TaskSpec& task, const Dataset& data);

/// ||Y_hat - Y||_F / max(1, ||Y||_F). Throws DimensionMismatch.
double recovery_error(const AggregateResult& result, const CMatrix& truth);

/// Runs encode -> worker_compute -> decode_cpa in process.
AggregateResult run_pipeline(const Dataset& data, const TaskSpec& task, const CpaScheme& scheme,
                             Validation validation = Validation::Required);

/// K matrices of shape q x v with entries uniform in the unit disk.
Dataset random_dataset(std::size_t K, std::size_t q, std::size_t v, Rng& rng);

/// Degree-d polynomial with unit-disk coefficients and |leading| >= 0.5.
TaskSpec random_task(int d, Rng& rng);

}  // namespace cpa
