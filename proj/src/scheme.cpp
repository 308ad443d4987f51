#include "cpa/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "cpa/error.hpp"
#include "cpa/random.hpp"

namespace cpa {

namespace {

constexpr double kWeightFloor = 1e-12;
constexpr double kAlphaSeparation = 1e-9;
constexpr double kLeadingFloor = 1e-10;
constexpr double kKernelTolerance = 1e-9;
constexpr double kRootSeparation = 1e-8;
constexpr double kDisjointness = 1e-8;
constexpr double kResidualTolerance = 1e-9;
constexpr double kCauchyBinetTolerance = 1e-8;
constexpr int kKernelDraws = 4;
constexpr int kMinStarts = 8;
constexpr int kMaxStarts = 256;
constexpr int kRefineIterations = 300;
constexpr double kRefineTolerance = 1e-7;
constexpr double kProbeTarget = 1e-9;
constexpr int kMaxIndividualStarts = 64;
constexpr double kIndividualProbeTarget = 1e-10;
constexpr int kMaxCauchyBinetC = 6;

std::string format_counts(const SystemParams& p) {
  std::ostringstream os;
  os << "K=" << p.K << " d=" << p.d << " N=" << p.N << " C=" << p.constraint_count();
  return os.str();
}

CScalar ipow(CScalar z, int e) {
  CScalar r{1.0};
  for (int i = 0; i < e; ++i) r *= z;
  return r;
}

double min_pairwise_gap(std::span<const CScalar> pts) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) gap = std::min(gap, std::abs(pts[i] - pts[j]));
  }
  return gap;
}

double min_cross_gap(std::span<const CScalar> a, std::span<const CScalar> b) {
  double gap = std::numeric_limits<double>::infinity();
  for (CScalar x : a) {
    for (CScalar y : b) gap = std::min(gap, std::abs(x - y));
  }
  return gap;
}

bool roots_distinct(std::span<const CScalar> beta) {
  return min_pairwise_gap(beta) > kRootSeparation * (1.0 + max_abs(beta));
}

bool roots_disjoint(std::span<const CScalar> alpha, std::span<const CScalar> beta) {
  const double scale = 1.0 + std::max(max_abs(alpha), max_abs(beta));
  return min_cross_gap(alpha, beta) > kDisjointness * scale;
}

// Residual and its scale for an arbitrary way of evaluating P at the alphas.
struct ResidualParts {
  double residual = 0.0;
  double scale = 1.0;
};

ResidualParts residual_from_values(const SystemParams& params, std::span<const CScalar> p_at_alpha) {
  ResidualParts out;
  const int C = params.constraint_count();
  for (int j = 0; j < C; ++j) {
    CScalar sum{0.0};
    double mag = 0.0;
    for (int k = 0; k < params.K; ++k) {
      const CScalar term = params.w[k] * p_at_alpha[k] * ipow(params.alpha[k], j);
      sum += term;
      mag += std::abs(term);
    }
    out.residual = std::max(out.residual, std::abs(sum));
    out.scale = std::max(out.scale, mag);
  }
  return out;
}

CVector combine(const std::vector<CVector>& basis, std::span<const CScalar> coeffs) {
  CVector c(basis.front().size(), CScalar{0.0});
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t n = 0; n < c.size(); ++n) c[n] += coeffs[i] * basis[i][n];
  }
  return c;
}

// Shared tail of scheme_from_coefficients once c has been checked against U.
CpaScheme scheme_from_kernel_vector(const SystemParams& params, std::span<const CScalar> c) {
  const CScalar lead = c.back();
  if (std::abs(lead) <= kLeadingFloor * max_abs(c)) {
    throw Error(ErrorCode::DegenerateLeading, "c_N vanishes relative to |c|");
  }
  CVector monic(c.begin(), c.end());
  for (auto& x : monic) x /= lead;
  monic.back() = 1.0;

  Poly p(std::move(monic));
  CVector beta = poly_roots(p);
  if (!roots_distinct(beta)) throw Error(ErrorCode::RepeatedRoots, "evaluation points are not distinct");
  if (!roots_disjoint(params.alpha, beta)) {
    throw Error(ErrorCode::DisjointnessViolated, "an evaluation point coincides with a data point");
  }
  return CpaScheme{params, std::move(beta), std::move(p), CVector(c.begin(), c.end())};
}

void check_kernel_membership(const SystemParams& params, std::span<const CScalar> c) {
  if (params.constraint_count() <= 0) return;
  const ConstraintSystem sys = build_constraint_system(params);
  const CVector uc = sys.U * c;
  const double scale = std::max(sys.U.norm_inf() * max_abs(c), std::numeric_limits<double>::min());
  if (max_abs(uc) > kKernelTolerance * scale) {
    throw Error(ErrorCode::NotInKernel, "U c is not zero");
  }
}


// Orthonormal basis (as K x C columns) of the span of conj(alpha^j), j < C.
// w .* P(alpha) satisfies the constraints iff it is orthogonal to these
// columns; the orthonormal form is far better conditioned than the raw
// Vandermonde rows when data points bunch up.
CMatrix constraint_row_space(const SystemParams& params) {
  const auto K = static_cast<std::size_t>(params.K);
  const auto C = static_cast<std::size_t>(params.constraint_count());
  CMatrix q(K, C);
  CVector v(K);
  for (std::size_t j = 0; j < C; ++j) {
    for (std::size_t k = 0; k < K; ++k) v[k] = std::conj(ipow(params.alpha[k], static_cast<int>(j)));
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        CScalar dot{0.0};
        for (std::size_t k = 0; k < K; ++k) dot += std::conj(q(k, i)) * v[k];
        for (std::size_t k = 0; k < K; ++k) v[k] -= dot * q(k, i);
      }
    }
    double norm = 0.0;
    for (CScalar x : v) norm += std::norm(x);
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < K; ++k) q(k, j) = v[k] / norm;
  }
  return q;
}

struct Projection {
  CVector u;          // w_k P(alpha_k)
  CVector g;          // q^H u
  double norm = 0.0;  // ||u||_2

  double relative() const {
    double s = 0.0;
    for (CScalar x : g) s += std::norm(x);
    return norm > 0.0 ? std::sqrt(s) / norm : std::numeric_limits<double>::infinity();
  }
};

Projection project(const SystemParams& params, const CMatrix& q, std::span<const CScalar> beta) {
  Projection out{CVector(params.alpha.size()), CVector(q.cols(), CScalar{0.0})};
  double sq = 0.0;
  for (std::size_t k = 0; k < out.u.size(); ++k) {
    CScalar prod = params.w[k];
    for (CScalar b : beta) prod *= (params.alpha[k] - b);
    out.u[k] = prod;
    sq += std::norm(prod);
  }
  out.norm = std::sqrt(sq);
  for (std::size_t j = 0; j < q.cols(); ++j) {
    for (std::size_t k = 0; k < out.u.size(); ++k) out.g[j] += std::conj(q(k, j)) * out.u[k];
  }
  return out;
}

// Moves the roots of P directly until w .* P(alpha) is orthogonal to the
// constraint space, by Levenberg-Marquardt on the normalized projection. When
// there is room (C < N) an extra row holds u^H du = 0, so a step cannot make
// progress just by shrinking every P(alpha_k), which would drag the roots
// onto the data points.
std::optional<CVector> refine_roots(const SystemParams& params, const CMatrix& q, CVector beta) {
  const auto N = beta.size();
  const auto C = q.cols();
  const std::size_t rows = C + 1 <= N ? C + 1 : C;
  Projection cur = project(params, q, beta);
  double mu = -1.0;

  for (int it = 0; it < kRefineIterations && cur.relative() > 1e-15; ++it) {
    CMatrix jac(rows, N);
    for (std::size_t m = 0; m < N; ++m) {
      for (std::size_t k = 0; k < cur.u.size(); ++k) {
        const CScalar du = -cur.u[k] / (params.alpha[k] - beta[m]);
        for (std::size_t j = 0; j < C; ++j) jac(j, m) += std::conj(q(k, j)) * du;
        if (rows > C) jac(C, m) += std::conj(cur.u[k]) * du / cur.norm;
      }
      for (std::size_t j = 0; j < rows; ++j) jac(j, m) /= cur.norm;
    }
    CVector rhs(rows, CScalar{0.0});
    for (std::size_t j = 0; j < C; ++j) rhs[j] = -cur.g[j] / cur.norm;

    CMatrix normal(rows, rows);
    double trace = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < rows; ++j) {
        CScalar s{0.0};
        for (std::size_t m = 0; m < N; ++m) s += jac(i, m) * std::conj(jac(j, m));
        normal(i, j) = s;
      }
      trace += normal(i, i).real();
    }
    if (!(trace > 0.0) || !std::isfinite(trace)) return std::nullopt;
    if (mu < 0.0) mu = 1e-3 * trace / static_cast<double>(rows);

    bool improved = false;
    for (int tries = 0; tries < 40 && !improved; ++tries) {
      CMatrix damped = normal;
      for (std::size_t i = 0; i < rows; ++i) damped(i, i) += mu;
      CVector y;
      try {
        y = solve_linear(damped, rhs);
      } catch (const Error&) {
        mu *= 10.0;
        continue;
      }
      CVector next = beta;
      for (std::size_t m = 0; m < N; ++m) {
        for (std::size_t i = 0; i < rows; ++i) next[m] += std::conj(jac(i, m)) * y[i];
      }
      Projection trial = project(params, q, next);
      const double r = trial.relative();
      if (std::isfinite(r) && r < cur.relative()) {
        beta = std::move(next);
        cur = std::move(trial);
        mu = std::max(mu / 10.0, 1e-20 * trace);
        improved = true;
      } else {
        mu *= 10.0;
      }
    }
    if (!improved) break;
  }
  if (!(cur.relative() <= kRefineTolerance)) return std::nullopt;
  return beta;
}

// Points placed next to data points, offset by a log-uniform radius in
// [0.01, 0.3]. Even-numbered starts spread the roots round-robin over a
// shuffled order of the data points; odd-numbered starts pick the data point
// for each root at random, so some get several roots and others none. The
// constraints sometimes need very uneven |P(alpha_k)|, which only the
// second kind reaches.
CVector clustered_start(const SystemParams& params, int start, Rng& rng) {
  std::vector<std::size_t> order(params.alpha.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, order.size() - 1);
  const double radius = std::pow(10.0, -2.0 + 1.5 * unit(rng));
  CVector beta(static_cast<std::size_t>(params.N));
  for (std::size_t n = 0; n < beta.size(); ++n) {
    const std::size_t k = start % 2 == 0 ? order[n % order.size()] : pick(rng);
    beta[n] = params.alpha[k] + radius * sample_unit_disk(rng);
  }
  return beta;
}

// Scalar instance used to compare candidate schemes: two random data
// vectors and a random degree-d task, pushed through the same value-form
// encode and decode as the real pipeline.
struct AccuracyProbe {
  std::vector<CVector> data;  // each of length K
  Poly task;
  std::vector<CScalar> truth;
};

AccuracyProbe make_probe(const SystemParams& params, Rng& rng) {
  AccuracyProbe probe;
  CVector f(static_cast<std::size_t>(params.d) + 1);
  for (CScalar& c : f) c = sample_unit_disk(rng);
  f.back() = std::polar(0.5 + 0.5 * std::abs(f.back()), std::arg(f.back()));
  probe.task = Poly(std::move(f));
  for (int r = 0; r < 2; ++r) {
    CVector xs(params.alpha.size());
    for (CScalar& x : xs) x = sample_unit_disk(rng);
    CScalar y{0.0};
    for (std::size_t k = 0; k < xs.size(); ++k) y += params.w[k] * poly_eval(probe.task, xs[k]);
    probe.data.push_back(std::move(xs));
    probe.truth.push_back(y);
  }
  return probe;
}

double probe_error(const SystemParams& params, std::span<const CScalar> beta, const AccuracyProbe& probe) {
  const CVector alpha_weights = barycentric_weights(params.alpha);
  const CVector beta_weights = barycentric_weights(beta);
  double err = 0.0;
  double ref = 0.0;
  CVector responses(beta.size());
  for (std::size_t r = 0; r < probe.data.size(); ++r) {
    for (std::size_t n = 0; n < beta.size(); ++n) {
      const CScalar share = barycentric_eval(params.alpha, probe.data[r], alpha_weights, beta[n]);
      responses[n] = poly_eval(probe.task, share);
    }
    CScalar y{0.0};
    for (std::size_t k = 0; k < params.alpha.size(); ++k) {
      y += params.w[k] * barycentric_eval(beta, responses, beta_weights, params.alpha[k]);
    }
    err += std::norm(y - probe.truth[r]);
    ref += std::norm(probe.truth[r]);
  }
  const double e = std::sqrt(err) / std::max(1.0, std::sqrt(ref));
  return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
}

// Worst relative error over the recovered F(X_k), for the N > d(K-1) case.
double individual_probe_error(const SystemParams& params, std::span<const CScalar> beta, const AccuracyProbe& probe) {
  const CVector alpha_weights = barycentric_weights(params.alpha);
  const CVector beta_weights = barycentric_weights(beta);
  CVector responses(beta.size());
  double worst = 0.0;
  for (const CVector& xs : probe.data) {
    for (std::size_t n = 0; n < beta.size(); ++n) {
      responses[n] = poly_eval(probe.task, barycentric_eval(params.alpha, xs, alpha_weights, beta[n]));
    }
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const CScalar fx = poly_eval(probe.task, xs[k]);
      const CScalar got = barycentric_eval(beta, responses, beta_weights, params.alpha[k]);
      worst = std::max(worst, std::abs(got - fx) / std::max(1.0, std::abs(fx)));
    }
  }
  return std::isfinite(worst) ? worst : std::numeric_limits<double>::infinity();
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Feasible: return "Feasible";
    case Verdict::InfeasibleCgeK: return "InfeasibleCgeK";
    case Verdict::InfeasibleTrivialKernel: return "InfeasibleTrivialKernel";
    case Verdict::IndividualDecodingRegime: return "IndividualDecodingRegime";
    case Verdict::Undetermined: return "Undetermined";
    case Verdict::ConditionsViolated: return "ConditionsViolated";
  }
  return "Unknown";
}

int min_responses(int K, int d) {
  if (K < 2 || d < 1) throw Error(ErrorCode::InvalidParams, "min_responses needs K >= 2 and d >= 1");
  if (d == 1) return (K - 1) / 2 + 1;
  return (d - 1) * (K - 1) + 1;
}

int individual_threshold(int K, int d) {
  if (K < 2 || d < 1) throw Error(ErrorCode::InvalidParams, "individual_threshold needs K >= 2 and d >= 1");
  return d * (K - 1) + 1;
}

void validate(const SystemParams& params) {
  if (params.K < 1 || params.d < 1 || params.N < 1) {
    throw Error(ErrorCode::InvalidParams, "K, d and N must be positive (" + format_counts(params) + ")");
  }
  if (params.w.size() != static_cast<std::size_t>(params.K) ||
      params.alpha.size() != static_cast<std::size_t>(params.K)) {
    throw Error(ErrorCode::InvalidParams, "weights and data points must both have K entries");
  }
  for (CScalar w : params.w) {
    if (std::abs(w) <= kWeightFloor) throw Error(ErrorCode::InvalidParams, "weights must be nonzero");
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
      throw Error(ErrorCode::InvalidParams, "weights must be finite");
    }
  }
  for (CScalar a : params.alpha) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw Error(ErrorCode::InvalidParams, "data points must be finite");
    }
  }
  if (min_pairwise_gap(params.alpha) <= kAlphaSeparation * (1.0 + max_abs(params.alpha))) {
    throw Error(ErrorCode::InvalidParams, "data points must be pairwise distinct");
  }
}

ConstraintSystem build_constraint_system(const SystemParams& params) {
  validate(params);
  const int C = params.constraint_count();
  if (C <= 0) {
    throw Error(ErrorCode::NoConstraints,
                "N exceeds d(K-1); individual decoding applies (" + format_counts(params) + ")");
  }
  const auto K = static_cast<std::size_t>(params.K);
  const auto cols = static_cast<std::size_t>(params.N) + 1;
  const auto rows = static_cast<std::size_t>(C);

  ConstraintSystem sys;
  sys.V = CMatrix(rows, K);
  sys.A = CMatrix(K, cols);
  for (std::size_t k = 0; k < K; ++k) {
    CScalar pw{1.0};
    for (std::size_t n = 0; n < std::max(rows, cols); ++n) {
      if (n < rows) sys.V(n, k) = pw;
      if (n < cols) sys.A(k, n) = pw;
      pw *= params.alpha[k];
    }
  }
  CMatrix vw = sys.V;
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::size_t k = 0; k < K; ++k) vw(j, k) *= params.w[k];
  }
  sys.U = vw * sys.A;
  sys.kernel = kernel_basis(sys.U);
  return sys;
}

CpaScheme construct_evaluation_points(const SystemParams& params, std::uint64_t seed) {
  validate(params);
  const int C = params.constraint_count();
  if (C <= 0) {
    throw Error(ErrorCode::NoConstraints,
                "N exceeds d(K-1); individual decoding applies (" + format_counts(params) + ")");
  }
  if (C >= params.K) {
    throw Error(ErrorCode::InfeasibleCgeK, "C >= K forces every data point to be a root (" +
                                               format_counts(params) + ")");
  }
  const ConstraintSystem sys = build_constraint_system(params);
  if (sys.kernel.empty()) {
    throw Error(ErrorCode::InfeasibleTrivialKernel, "U has a trivial kernel (" + format_counts(params) + ")");
  }

  Rng rng(seed);
  const AccuracyProbe probe = make_probe(params, rng);
  std::optional<CpaScheme> best;
  double best_error = std::numeric_limits<double>::infinity();
  std::string last_failure = "no attempt";

  const auto consider = [&](CpaScheme candidate) {
    const FeasibilityCertificate cert = check_feasibility(candidate);
    if (cert.verdict != Verdict::Feasible) {
      last_failure = cert.detail;
      return;
    }
    const double e = probe_error(params, candidate.beta, probe);
    if (!best || e < best_error) {
      best_error = e;
      best = std::move(candidate);
    }
  };

  // Plain random kernel vectors: sum of Gaussian multiples of the basis.
  for (int draw = 0; draw < kKernelDraws; ++draw) {
    const CVector c = combine(sys.kernel, sample_gaussian(sys.kernel.size(), rng));
    try {
      consider(scheme_from_kernel_vector(params, c));
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::DegenerateLeading:
        case ErrorCode::RepeatedRoots:
        case ErrorCode::DisjointnessViolated:
        case ErrorCode::NoConvergence:
          last_failure = e.what();
          break;
        default:
          throw;
      }
    }
  }

  // Kernel vectors whose roots sit next to the data points. These are
  // usually far better conditioned than a random kernel vector; keep
  // drawing until one of them decodes the probe cleanly.
  const CMatrix q = constraint_row_space(params);
  for (int start = 0; start < kMaxStarts; ++start) {
    if (start >= kMinStarts && best && best_error <= kProbeTarget) break;
    if (auto beta = refine_roots(params, q, clustered_start(params, start, rng))) {
      consider(scheme_from_points(params, std::move(*beta)));
    } else {
      last_failure = "root refinement did not reach the constraint set";
    }
  }

  if (best) return std::move(*best);
  throw Error(ErrorCode::GenericityExhausted,
              "no feasible kernel vector among " + std::to_string(kKernelDraws + kMaxStarts) + " candidates (" +
                  format_counts(params) + "); last failure: " + last_failure);
}

CpaScheme scheme_from_coefficients(const SystemParams& params, std::span<const CScalar> c) {
  validate(params);
  if (c.size() != static_cast<std::size_t>(params.N) + 1) {
    throw Error(ErrorCode::InvalidParams, "coefficient vector must have N+1 entries");
  }
  check_kernel_membership(params, c);
  return scheme_from_kernel_vector(params, c);
}

CpaScheme individual_decoding_scheme(const SystemParams& params, std::uint64_t seed) {
  validate(params);
  if (params.constraint_count() > 0) {
    throw Error(ErrorCode::InvalidParams,
                "individual decoding needs N > d(K-1) (" + format_counts(params) + ")");
  }
  Rng rng(seed);
  const AccuracyProbe probe = make_probe(params, rng);
  std::optional<CpaScheme> best;
  double best_error = std::numeric_limits<double>::infinity();
  for (int start = 0; start < kMaxIndividualStarts; ++start) {
    if (start >= kMinStarts && best && best_error <= kIndividualProbeTarget) break;
    CpaScheme candidate = scheme_from_points(params, clustered_start(params, start, rng));
    if (check_feasibility(candidate).verdict != Verdict::IndividualDecodingRegime) continue;
    const double e = individual_probe_error(params, candidate.beta, probe);
    if (!best || e < best_error) {
      best_error = e;
      best = std::move(candidate);
    }
  }
  if (best) return std::move(*best);
  throw Error(ErrorCode::GenericityExhausted, "no distinct, disjoint evaluation points found (" +
                                                  format_counts(params) + ")");
}

CpaScheme scheme_from_points(const SystemParams& params, CVector beta) {
  validate(params);
  if (beta.size() != static_cast<std::size_t>(params.N)) {
    throw Error(ErrorCode::InvalidParams, "need exactly N evaluation points");
  }
  Poly p = Poly::from_roots(beta);
  CVector c = p.coeffs();
  return CpaScheme{params, std::move(beta), std::move(p), std::move(c)};
}

double orthogonality_residual(const CpaScheme& scheme) {
  const SystemParams& params = scheme.params;
  CVector p_at_alpha(params.alpha.size());
  for (std::size_t k = 0; k < p_at_alpha.size(); ++k) p_at_alpha[k] = poly_eval(scheme.P, params.alpha[k]);
  return residual_from_values(params, p_at_alpha).residual;
}

double residual_scale(const CpaScheme& scheme) {
  const SystemParams& params = scheme.params;
  CVector p_at_alpha(params.alpha.size());
  for (std::size_t k = 0; k < p_at_alpha.size(); ++k) p_at_alpha[k] = poly_eval(scheme.P, params.alpha[k]);
  return residual_from_values(params, p_at_alpha).scale;
}

FeasibilityCertificate check_feasibility(const CpaScheme& scheme) {
  const SystemParams& params = scheme.params;
  FeasibilityCertificate cert;
  std::vector<std::string> failures;

  try {
    validate(params);
  } catch (const Error& e) {
    cert.verdict = Verdict::ConditionsViolated;
    cert.detail = e.what();
    return cert;
  }
  if (scheme.beta.size() != static_cast<std::size_t>(params.N)) {
    failures.emplace_back("evaluation point count differs from N");
  } else {
    if (!roots_distinct(scheme.beta)) failures.emplace_back("distinctness: evaluation points repeat");
    if (!roots_disjoint(params.alpha, scheme.beta)) {
      failures.emplace_back("disjointness: an evaluation point coincides with a data point");
    }
  }

  const int C = params.constraint_count();
  if (C >= 1 && scheme.beta.size() == static_cast<std::size_t>(params.N)) {
    CVector p_at_alpha(params.alpha.size());
    for (std::size_t k = 0; k < p_at_alpha.size(); ++k) {
      CScalar prod{1.0};
      for (CScalar b : scheme.beta) prod *= (params.alpha[k] - b);
      p_at_alpha[k] = prod;
    }
    const ResidualParts parts = residual_from_values(params, p_at_alpha);
    cert.residual = parts.residual;
    if (!(parts.residual < kResidualTolerance * parts.scale)) {
      std::ostringstream os;
      os << "orthogonality: residual " << parts.residual << " exceeds " << kResidualTolerance * parts.scale;
      failures.push_back(os.str());
    }
  }

  if (!failures.empty()) {
    cert.verdict = Verdict::ConditionsViolated;
    for (std::size_t i = 0; i < failures.size(); ++i) {
      if (i) cert.detail += "; ";
      cert.detail += failures[i];
    }
    return cert;
  }
  if (C <= 0) {
    cert.verdict = Verdict::IndividualDecodingRegime;
    cert.detail = "N >= d(K-1)+1: any distinct, disjoint points recover every F(X_k)";
    return cert;
  }
  cert.verdict = Verdict::Feasible;
  cert.detail = "distinct, disjoint, orthogonality holds";
  return cert;
}

FeasibilityCertificate infeasibility_certificate(const SystemParams& params) {
  validate(params);
  const int C = params.constraint_count();
  FeasibilityCertificate cert;
  if (C <= 0) {
    cert.verdict = Verdict::IndividualDecodingRegime;
    cert.detail = "N > d(K-1); outside the CPA regime (" + format_counts(params) + ")";
    return cert;
  }
  if (params.N < 2) {
    throw Error(ErrorCode::OutOfRegime, "certificates cover 2 <= N <= d(K-1) (" + format_counts(params) + ")");
  }
  if (C >= params.K) {
    cert.verdict = Verdict::InfeasibleCgeK;
    cert.detail = "C >= K: V diag(w) has a trivial kernel, so P vanishes at every data point";
    return cert;
  }
  const ConstraintSystem sys = build_constraint_system(params);
  const std::size_t rank = matrix_rank(sys.U);
  const auto cols = static_cast<std::size_t>(params.N) + 1;
  if (rank == cols) {
    cert.verdict = Verdict::InfeasibleTrivialKernel;
    cert.detail = "rank(U) = N+1 = " + std::to_string(cols) + ": only c = 0 solves U c = 0";
    return cert;
  }
  cert.verdict = Verdict::Undetermined;
  cert.detail = "rank(U) = " + std::to_string(rank) + " < N+1; kernel dimension " +
                std::to_string(cols - rank) + ", attempt construction";
  return cert;
}

CauchyBinetResult cauchy_binet_check(const SystemParams& params) {
  validate(params);
  const int C = params.constraint_count();
  if (C <= 0) throw Error(ErrorCode::NoConstraints, "Cauchy-Binet check needs C >= 1");
  if (C > kMaxCauchyBinetC) throw Error(ErrorCode::TooLarge, "C > 6 makes subset enumeration too large");
  if (C > params.K || C > params.N + 1) {
    throw Error(ErrorCode::InvalidParams, "Cauchy-Binet check needs C <= K and C <= N+1");
  }
  const ConstraintSystem sys = build_constraint_system(params);
  const auto c = static_cast<std::size_t>(C);

  CauchyBinetResult out;
  out.lhs = determinant(sys.U.col_block(0, c));

  const CMatrix a_first = sys.A.col_block(0, c);
  const auto K = static_cast<std::size_t>(params.K);
  std::vector<std::size_t> subset(c);
  for (std::size_t i = 0; i < c; ++i) subset[i] = i;
  out.rhs = 0.0;
  while (true) {
    CScalar weight{1.0};
    for (std::size_t k : subset) weight *= params.w[k];
    const CScalar det = determinant(a_first.select_rows(subset));
    out.rhs += weight * det * det;

    // Next combination in lexicographic order.
    std::size_t i = c;
    while (i > 0 && subset[i - 1] == K - c + (i - 1)) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (std::size_t j = i; j < c; ++j) subset[j] = subset[j - 1] + 1;
  }
  out.agree = std::abs(out.lhs - out.rhs) < kCauchyBinetTolerance * (1.0 + std::abs(out.lhs));
  return out;
}

SystemParams random_params(int K, int d, int N, std::uint64_t seed) {
  Rng rng(seed);
  SystemParams p;
  p.K = K;
  p.d = d;
  p.N = N;
  p.alpha = sample_generic_points(static_cast<std::size_t>(K), rng);
  p.w = sample_weights(static_cast<std::size_t>(K), rng);
  return p;
}

ProbeReport genericity_probe(int K, int d, int N, int trials, std::uint64_t seed) {
  if (K < 2 || d < 1 || trials < 1) throw Error(ErrorCode::InvalidRegime, "probe needs K >= 2, d >= 1, trials >= 1");
  const int n_star = min_responses(K, d);
  if (N < n_star || N > d * (K - 1)) {
    throw Error(ErrorCode::InvalidRegime, "probe needs N* = " + std::to_string(n_star) + " <= N <= d(K-1) = " +
                                              std::to_string(d * (K - 1)));
  }

  ProbeReport report{K, d, N, trials};
  for (int t = 0; t < trials; ++t) {
    const auto ut = static_cast<std::uint64_t>(t);
    const SystemParams params = random_params(K, d, N, sub_seed(seed, {1, std::uint64_t(K), std::uint64_t(d),
                                                                       std::uint64_t(N), ut}));
    try {
      const CpaScheme scheme = construct_evaluation_points(
          params, sub_seed(seed, {2, std::uint64_t(K), std::uint64_t(d), std::uint64_t(N), ut}));
      if (check_feasibility(scheme).verdict == Verdict::Feasible) ++report.constructed;
    } catch (const Error&) {
    }

    const ConstraintSystem sys = build_constraint_system(params);
    if (sys.kernel.empty()) continue;
    Rng rng(sub_seed(seed, {3, std::uint64_t(K), std::uint64_t(d), std::uint64_t(N), ut}));
    const CVector c = combine(sys.kernel, sample_gaussian(sys.kernel.size(), rng));
    const double c_norm = max_abs(c);

    if (std::abs(c.back()) <= kLeadingFloor * c_norm) continue;
    ++report.leading_nonzero;

    const CVector ac = sys.A * c;
    bool disjoint = true;
    for (std::size_t k = 0; k < ac.size(); ++k) {
      double row_mag = 0.0;
      for (std::size_t n = 0; n < c.size(); ++n) row_mag += std::abs(sys.A(k, n));
      if (std::abs(ac[k]) <= kDisjointness * c_norm * row_mag) disjoint = false;
    }
    if (!disjoint) continue;
    ++report.disjoint;

    try {
      if (roots_distinct(poly_roots(Poly(c)))) ++report.distinct;
    } catch (const Error&) {
    }
  }
  return report;
}

}  // namespace cpa
