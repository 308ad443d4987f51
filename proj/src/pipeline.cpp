#include "cpa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cpa/error.hpp"

namespace cpa {

namespace {

void check_dataset(const Dataset& data) {
  if (data.matrices.empty()) throw Error(ErrorCode::DimensionMismatch, "dataset has no matrices");
  for (const CMatrix& m : data.matrices) {
    if (!m.same_shape(data.matrices.front())) {
      throw Error(ErrorCode::DimensionMismatch, "dataset matrices differ in shape");
    }
  }
}

// Sorts by worker index and checks there is exactly one response per index
// in [0, expected).
void normalize_responses(std::vector<WorkerResponse>& responses, std::size_t expected) {
  std::sort(responses.begin(), responses.end(),
            [](const WorkerResponse& a, const WorkerResponse& b) { return a.worker_index < b.worker_index; });
  std::vector<std::size_t> missing;
  std::size_t next = 0;
  for (const WorkerResponse& r : responses) {
    if (r.worker_index >= expected || r.worker_index < next) {
      throw Error(ErrorCode::MissingResponses,
                  "unexpected or duplicate response from worker " + std::to_string(r.worker_index));
    }
    while (next < r.worker_index) missing.push_back(next++);
    ++next;
  }
  while (next < expected) missing.push_back(next++);
  if (!missing.empty()) {
    std::string list;
    for (std::size_t m : missing) list += (list.empty() ? "" : ",") + std::to_string(m);
    throw Error(ErrorCode::MissingResponses, "no response from worker(s) " + list);
  }
  for (const WorkerResponse& r : responses) {
    if (!r.payload.same_shape(responses.front().payload)) {
      throw Error(ErrorCode::DimensionMismatch, "response payloads differ in shape");
    }
  }
}

// Value interpolation through (nodes, payloads) entry by entry, evaluated at
// arbitrary targets. Holds the barycentric weights so each target costs O(m)
// per entry.
class EntrywiseInterpolant {
 public:
  EntrywiseInterpolant(std::span<const CScalar> nodes, std::vector<const CMatrix*> payloads)
      : nodes_(nodes.begin(), nodes.end()), payloads_(std::move(payloads)) {
    require_distinct_nodes(nodes_);
    weights_ = barycentric_weights(nodes_);
  }

  // Accumulates weight * I(z) into out.
  void accumulate(CMatrix& out, CScalar z, CScalar weight) const {
    auto cells = out.data();
    CVector ys(nodes_.size());
    for (std::size_t e = 0; e < cells.size(); ++e) {
      for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = payloads_[i]->data()[e];
      cells[e] += weight * barycentric_eval(nodes_, ys, weights_, z);
    }
  }

 private:
  CVector nodes_;
  std::vector<const CMatrix*> payloads_;
  CVector weights_;
};

std::vector<const CMatrix*> payloads_of(std::span<const WorkerResponse> responses) {
  std::vector<const CMatrix*> out;
  out.reserve(responses.size());
  for (const WorkerResponse& r : responses) out.push_back(&r.payload);
  return out;
}

}  // namespace

CMatrix TaskSpec::apply(const CMatrix& x) const {
  CMatrix out = x;
  for (CScalar& e : out.data()) e = poly_eval(F, e);
  return out;
}

CMatrix ground_truth(const Dataset& data, const TaskSpec& task, std::span<const CScalar> w) {
  check_dataset(data);
  if (w.size() != data.K()) throw Error(ErrorCode::DimensionMismatch, "one weight per dataset required");
  CMatrix sum(data.q(), data.v());
  for (std::size_t k = 0; k < data.K(); ++k) {
    const CMatrix fx = task.apply(data.matrices[k]);
    auto dst = sum.data();
    auto src = fx.data();
    for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += w[k] * src[e];
  }
  return sum;
}

std::vector<EncodedShare> encode(const Dataset& data, const CpaScheme& scheme) {
  check_dataset(data);
  if (data.K() != static_cast<std::size_t>(scheme.params.K)) {
    throw Error(ErrorCode::DimensionMismatch, "dataset count differs from K");
  }
  std::vector<const CMatrix*> payloads;
  for (const CMatrix& m : data.matrices) payloads.push_back(&m);
  const EntrywiseInterpolant encoder(scheme.params.alpha, std::move(payloads));

  std::vector<EncodedShare> shares;
  shares.reserve(scheme.beta.size());
  for (std::size_t n = 0; n < scheme.beta.size(); ++n) {
    EncodedShare share{n, scheme.beta[n], CMatrix(data.q(), data.v())};
    encoder.accumulate(share.payload, scheme.beta[n], CScalar{1.0});
    shares.push_back(std::move(share));
  }
  return shares;
}

WorkerResponse worker_compute(const EncodedShare& share, const TaskSpec& task) {
  return WorkerResponse{share.worker_index, task.apply(share.payload)};
}

std::vector<Poly> interpolate_decoder(std::span<const WorkerResponse> responses, std::span<const CScalar> beta) {
  if (responses.size() != beta.size() || responses.empty()) {
    throw Error(ErrorCode::MissingResponses, "need one response per evaluation point");
  }
  const std::size_t entries = responses.front().payload.data().size();
  std::vector<Poly> decoders;
  decoders.reserve(entries);
  CVector ys(responses.size());
  for (std::size_t e = 0; e < entries; ++e) {
    for (std::size_t n = 0; n < responses.size(); ++n) ys[n] = responses[n].payload.data()[e];
    decoders.push_back(lagrange_interpolate(beta, ys));
  }
  return decoders;
}

AggregateResult decode_cpa(std::vector<WorkerResponse> responses, const CpaScheme& scheme, Validation validation) {
  normalize_responses(responses, scheme.beta.size());
  if (validation == Validation::Required) {
    const FeasibilityCertificate cert = check_feasibility(scheme);
    if (cert.verdict != Verdict::Feasible && cert.verdict != Verdict::IndividualDecodingRegime) {
      throw Error(ErrorCode::SchemeNotValidated, std::string(to_string(cert.verdict)) + ": " + cert.detail);
    }
  }
  if (scheme.params.alpha.size() != scheme.params.w.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one weight per data point required");
  }
  const EntrywiseInterpolant decoder(scheme.beta, payloads_of(responses));
  const CMatrix& shape = responses.front().payload;
  AggregateResult result{CMatrix(shape.rows(), shape.cols()), DecodeMethod::CPA};
  for (std::size_t k = 0; k < scheme.params.alpha.size(); ++k) {
    decoder.accumulate(result.Y_hat, scheme.params.alpha[k], scheme.params.w[k]);
  }
  return result;
}

IndividualDecodeResult decode_individual(std::vector<WorkerResponse> responses, std::span<const CScalar> beta,
                                         const SystemParams& params) {
  validate(params);
  if (params.N <= params.d * (params.K - 1)) {
    throw Error(ErrorCode::InsufficientResponses,
                "individual decoding needs N >= d(K-1)+1 = " + std::to_string(params.d * (params.K - 1) + 1));
  }
  if (beta.size() != static_cast<std::size_t>(params.N)) {
    throw Error(ErrorCode::InvalidParams, "need exactly N evaluation points");
  }
  normalize_responses(responses, beta.size());
  const EntrywiseInterpolant decoder(beta, payloads_of(responses));
  const CMatrix& shape = responses.front().payload;

  IndividualDecodeResult out;
  out.aggregate = AggregateResult{CMatrix(shape.rows(), shape.cols()), DecodeMethod::IndividualDecoding};
  for (std::size_t k = 0; k < params.alpha.size(); ++k) {
    CMatrix fk(shape.rows(), shape.cols());
    decoder.accumulate(fk, params.alpha[k], CScalar{1.0});
    auto dst = out.aggregate.Y_hat.data();
    auto src = fk.data();
    for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += params.w[k] * src[e];
    out.per_dataset.push_back(std::move(fk));
  }
  return out;
}

ErrorPolyReport error_polynomial_check(const CpaScheme& scheme, const TaskSpec& task, const Dataset& data) {
  check_dataset(data);
  if (data.q() != 1 || data.v() != 1) {
    throw Error(ErrorCode::NonScalarData, "error polynomial diagnostic needs scalar data");
  }
  const SystemParams& params = scheme.params;
  if (data.K() != static_cast<std::size_t>(params.K)) {
    throw Error(ErrorCode::DimensionMismatch, "dataset count differs from K");
  }

  CVector xs(data.K());
  for (std::size_t k = 0; k < data.K(); ++k) xs[k] = data.matrices[k](0, 0);
  const Poly encoder = lagrange_interpolate(params.alpha, xs);

  CVector responses(scheme.beta.size());
  for (std::size_t n = 0; n < scheme.beta.size(); ++n) {
    responses[n] = poly_eval(task.F, poly_eval(encoder, scheme.beta[n]));
  }
  const Poly decoder = lagrange_interpolate(scheme.beta, responses);

  ErrorPolyReport report;
  report.delta = (decoder - compose(task.F, encoder)).trimmed();
  report.degree_bound = params.d * (params.K - 1);

  const Poly monic_p = Poly::from_roots(scheme.beta);
  const DivisionResult div = poly_divide(report.delta, monic_p);
  report.remainder_norm = div.remainder.max_abs_coeff() / std::max(1.0, report.delta.max_abs_coeff());

  CScalar sum{0.0};
  double mag = 0.0;
  for (std::size_t k = 0; k < params.alpha.size(); ++k) {
    const CScalar term = params.w[k] * poly_eval(report.delta, params.alpha[k]);
    sum += term;
    mag += std::abs(term);
  }
  report.aggregate_error = std::abs(sum) / std::max(1.0, mag);
  return report;
}

double recovery_error(const AggregateResult& result, const CMatrix& truth) {
  if (!result.Y_hat.same_shape(truth)) throw Error(ErrorCode::DimensionMismatch, "result and truth shapes differ");
  return (result.Y_hat - truth).norm_frobenius() / std::max(1.0, truth.norm_frobenius());
}

AggregateResult run_pipeline(const Dataset& data, const TaskSpec& task, const CpaScheme& scheme,
                             Validation validation) {
  std::vector<WorkerResponse> responses;
  for (const EncodedShare& share : encode(data, scheme)) responses.push_back(worker_compute(share, task));
  return decode_cpa(std::move(responses), scheme, validation);
}

Dataset random_dataset(std::size_t K, std::size_t q, std::size_t v, Rng& rng) {
  Dataset data;
  for (std::size_t k = 0; k < K; ++k) {
    CMatrix m(q, v);
    for (CScalar& e : m.data()) e = sample_unit_disk(rng);
    data.matrices.push_back(std::move(m));
  }
  return data;
}

TaskSpec random_task(int d, Rng& rng) {
  CVector c(static_cast<std::size_t>(d) + 1);
  for (CScalar& x : c) x = sample_unit_disk(rng);
  const double theta = std::arg(c.back());
  const double r = 0.5 + 0.5 * std::abs(c.back());
  c.back() = std::polar(r, std::isfinite(theta) ? theta : 0.0);
  return TaskSpec{Poly(std::move(c))};
}

}  // namespace cpa
