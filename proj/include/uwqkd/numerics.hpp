#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace uwqkd {

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;

  void validate() const;

  bool operator==(const QuadratureSpec&) const = default;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  long evaluations = 0;
};

using Integrand = std::function<double(double)>;

// Bessel functions of the first kind. Throw DomainError on non-finite input.
double bessel_j0(double x);
double bessel_j1(double x);
double bessel_jn(int order, double x);

// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b].
// Throws ConvergenceError (carrying the best estimate) when the subdivision
// budget runs out before abs_tol + rel_tol*|I| is reached.
double integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec = {});
QuadratureResult integrate_detailed(const Integrand& f, double a, double b,
                                    const QuadratureSpec& spec = {});

// Same, starting from a caller-supplied partition (strictly increasing points,
// first = a, last = b). The subdivision budget counts bisections beyond it.
QuadratureResult integrate_partitioned(const Integrand& f, const std::vector<double>& points,
                                       const QuadratureSpec& spec = {});

// h(p) in bits, 0 log 0 = 0.
double binary_entropy(double p);

// Reproducible stream keyed by (seed, stream_id). Single owner.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // (0, 1], safe under log.
  double uniform_open_low() { return 1.0 - uniform(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace uwqkd
