#include "uwqkd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "uwqkd/errors.hpp"

namespace uwqkd {

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0)) throw DomainError("quadrature abs_tol must be > 0");
  if (!(rel_tol > 0.0)) throw DomainError("quadrature rel_tol must be > 0");
  if (max_subdivisions < 1) throw DomainError("quadrature max_subdivisions must be >= 1");
}

namespace {

void require_finite(double x, const char* who) {
  if (!std::isfinite(x)) throw DomainError(std::string(who) + ": non-finite argument");
}

}  // namespace

double bessel_j0(double x) {
  require_finite(x, "bessel_j0");
  return std::cyl_bessel_j(0.0, std::fabs(x));
}

double bessel_j1(double x) {
  require_finite(x, "bessel_j1");
  double v = std::cyl_bessel_j(1.0, std::fabs(x));
  return x < 0.0 ? -v : v;
}

double bessel_jn(int order, double x) {
  require_finite(x, "bessel_jn");
  if (order < 0) throw DomainError("bessel_jn: negative order");
  double v = std::cyl_bessel_j(static_cast<double>(order), std::fabs(x));
  return (x < 0.0 && (order % 2) == 1) ? -v : v;
}

namespace {

// Kronrod 15-point abscissae/weights and the embedded 7-point Gauss weights.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const Integrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  kron *= h;
  gauss *= h;
  double err = std::fabs(kron - gauss);
  if (!std::isfinite(kron)) err = INFINITY;
  return {a, b, kron, err};
}

}  // namespace

QuadratureResult integrate_partitioned(const Integrand& f, const std::vector<double>& points,
                                       const QuadratureSpec& spec) {
  spec.validate();
  if (points.size() < 2) throw DomainError("integrate: need at least two partition points");
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i] < points[i + 1]) || !std::isfinite(points[i]) || !std::isfinite(points[i + 1]))
      throw DomainError("integrate: partition must be finite and strictly increasing");
  }

  std::priority_queue<Panel> heap;
  long double total = 0.0L;
  long double total_err = 0.0L;
  long evals = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    Panel p = gk15(f, points[i], points[i + 1]);
    evals += 15;
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }

  int splits = 0;
  auto target = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::fabs(static_cast<double>(total))); };
  while (total_err > target()) {
    if (splits >= spec.max_subdivisions) break;
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval no longer divisible
    heap.pop();
    Panel left = gk15(f, worst.a, mid);
    Panel right = gk15(f, mid, worst.b);
    evals += 30;
    ++splits;
    total += static_cast<long double>(left.value) + right.value - worst.value;
    total_err += static_cast<long double>(left.error) + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum exactly to shed incremental drift.
  QuadratureResult r;
  r.intervals = static_cast<int>(heap.size());
  r.evaluations = evals;
  long double v = 0.0L, e = 0.0L;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  r.value = static_cast<double>(v);
  r.error = static_cast<double>(e);
  if (!std::isfinite(r.value) || r.error > std::max(spec.abs_tol, spec.rel_tol * std::fabs(r.value))) {
    throw ConvergenceError("integrate: tolerance not reached (estimate " + std::to_string(r.value) +
                               ", error " + std::to_string(r.error) + ")",
                           r.value, r.error);
  }
  return r;
}

QuadratureResult integrate_detailed(const Integrand& f, double a, double b, const QuadratureSpec& spec) {
  if (!(a < b)) throw DomainError("integrate: require a < b");
  return integrate_partitioned(f, {a, b}, spec);
}

double integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec) {
  return integrate_detailed(f, a, b, spec).value;
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binary_entropy: p outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x75776b64u};
  engine_.seed(seq);
}

}  // namespace uwqkd
