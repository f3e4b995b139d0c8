#include "cqe/wavefunction.hpp"

#include <cmath>

#include "cqe/constants.hpp"
#include "cqe/error.hpp"

namespace cqe {

namespace {

constexpr double rescale_threshold = 1e150;

// ψ_0..ψ_{count-1}(y) as mantissas sharing one log scale per entry.
void weighted_recurrence(int count, double y, std::vector<double>& mantissa, std::vector<double>& log_scale) {
  mantissa.assign(static_cast<std::size_t>(count), 0.0);
  log_scale.assign(static_cast<std::size_t>(count), 0.0);
  double prev = 0.0;
  double cur = 1.0;
  double scale = -0.5 * y * y - 0.25 * std::log(constants::pi);
  for (int n = 0; n < count; ++n) {
    if (n > 0) {
      const double next = std::sqrt(2.0 / n) * y * cur - std::sqrt((n - 1.0) / n) * prev;
      prev = cur;
      cur = next;
    }
    if (std::abs(cur) > rescale_threshold) {
      cur /= rescale_threshold;
      prev /= rescale_threshold;
      scale += std::log(rescale_threshold);
    }
    mantissa[static_cast<std::size_t>(n)] = cur;
    log_scale[static_cast<std::size_t>(n)] = scale;
  }
}

double combine(double mantissa, double log_scale) {
  if (mantissa == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(mantissa)) + log_scale), mantissa);
}

}  // namespace

std::vector<double> hermite_functions(int count, double y) {
  if (count < 0) throw InputError("Hermite order must be non-negative");
  if (!std::isfinite(y)) throw InputError("Hermite argument must be finite");
  std::vector<double> m;
  std::vector<double> s;
  weighted_recurrence(count, y, m, s);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = combine(m[i], s[i]);
  return out;
}

double hermite_function(int n, double y) {
  if (n < 0) throw InputError("Hermite order must be non-negative");
  return hermite_functions(n + 1, y).back();
}

double hermite_eval(int n, double x) {
  if (n < 0) throw InputError("Hermite order must be non-negative");
  if (!std::isfinite(x)) throw InputError("Hermite argument must be finite");
  // Plain recurrence while far from overflow, scaled form beyond.
  double prev = 0.0;
  double cur = 1.0;
  bool overflow = false;
  for (int k = 0; k < n && !overflow; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
    overflow = !(std::abs(cur) < 1e280);
  }
  if (!overflow) return cur;
  std::vector<double> m;
  std::vector<double> s;
  weighted_recurrence(n + 1, x, m, s);
  const auto k = static_cast<std::size_t>(n);
  // H_n = ψ_n e^{x²/2} sqrt(2^n n! sqrt(π))
  const double log_norm = 0.5 * (n * std::log(2.0) + std::lgamma(n + 1.0) + 0.5 * std::log(constants::pi));
  return combine(m[k], s[k] + 0.5 * x * x + log_norm);
}

std::vector<int> PhaseGrid::shape() const {
  std::vector<int> out;
  for (const auto& a : axes)
    if (const auto* v = std::get_if<std::vector<double>>(&a)) out.push_back(static_cast<int>(v->size()));
  return out;
}

long PhaseGrid::size() const {
  long n = 1;
  for (int d : shape()) n *= d;
  return n;
}

Complex mode_basis_function(const TransformedCircuit& tc, const ModeBasis& basis, int mode, int level, double phase,
                            double origin) {
  const auto& part = tc.partition;
  if (mode < 0 || mode >= part.size()) throw InputError("mode index out of range");
  const int levels = basis.truncations[static_cast<std::size_t>(mode)];
  if (level < 0 || level >= levels) throw InputError("basis level out of range");
  if (part.kind(mode) == ModeKind::Harmonic) {
    const double width = tc.phase_zero_point()(mode) * std::sqrt(2.0);
    return hermite_function(level, (phase - origin) / width) / std::sqrt(width);
  }
  const int n = levels == 1 ? 0 : charge_number(level, levels);
  return std::exp(Complex(0.0, n * phase)) / std::sqrt(2.0 * constants::pi);
}

GridValues eig_phase_coord(const Eigen::Ref<const Eigen::VectorXcd>& evec, const TransformedCircuit& tc,
                           const ModeBasis& basis, const PhaseGrid& grid, const Eigen::VectorXd& origin) {
  const auto& part = tc.partition;
  const int modes = part.size();
  if (origin.size() != 0 && origin.size() != part.n_harmonic)
    throw InputError("harmonic origin has " + std::to_string(origin.size()) + " entries but the circuit has " +
                     std::to_string(part.n_harmonic) + " harmonic modes");
  if (static_cast<int>(grid.axes.size()) != modes)
    throw InputError("phase grid has " + std::to_string(grid.axes.size()) + " axes but the circuit has " +
                     std::to_string(modes) + " modes");
  if (evec.size() != basis.dim()) throw InputError("eigenvector length does not match the basis dimension");

  std::vector<std::vector<double>> points(static_cast<std::size_t>(modes));
  for (int m = 0; m < modes; ++m) {
    const auto& axis = grid.axes[static_cast<std::size_t>(m)];
    auto& p = points[static_cast<std::size_t>(m)];
    if (const auto* v = std::get_if<std::vector<double>>(&axis)) {
      if (v->empty()) throw InputError("phase axis of mode " + std::to_string(m + 1) + " is empty");
      p = *v;
    } else {
      p = {std::get<double>(axis)};
    }
    for (double x : p)
      if (!std::isfinite(x)) throw InputError("phase grid of mode " + std::to_string(m + 1) + " has a non-finite value");
  }

  // Contract from the last (fastest) mode backwards. The running tensor has
  // layout [t_0 .. t_{a-1}, t_a, g_{a+1} .. g_{N-1}] in row-major order.
  std::vector<Complex> tensor(evec.data(), evec.data() + evec.size());
  long suffix = 1;
  for (int a = modes - 1; a >= 0; --a) {
    const auto ua = static_cast<std::size_t>(a);
    const int levels = basis.truncations[ua];
    const auto& pts = points[ua];
    const auto g = static_cast<Eigen::Index>(pts.size());
    DenseMatrix table(g, levels);
    if (part.kind(a) == ModeKind::Harmonic) {
      const double width = tc.phase_zero_point()(a) * std::sqrt(2.0);
      const double centre = origin.size() ? origin(a) : 0.0;
      for (Eigen::Index i = 0; i < g; ++i) {
        auto h = hermite_functions(levels, (pts[static_cast<std::size_t>(i)] - centre) / width);
        for (int k = 0; k < levels; ++k) table(i, k) = h[static_cast<std::size_t>(k)] / std::sqrt(width);
      }
    } else {
      for (Eigen::Index i = 0; i < g; ++i)
        for (int k = 0; k < levels; ++k) table(i, k) = mode_basis_function(tc, basis, a, k, pts[static_cast<std::size_t>(i)]);
    }
    const long prefix = static_cast<long>(tensor.size()) / (levels * suffix);
    std::vector<Complex> next(static_cast<std::size_t>(prefix * g * suffix));
    for (long p = 0; p < prefix; ++p) {
      Eigen::Map<const DenseMatrix> block(tensor.data() + p * levels * suffix, suffix, levels);
      Eigen::Map<DenseMatrix> out(next.data() + p * g * suffix, suffix, g);
      out.noalias() = block * table.transpose();
    }
    tensor = std::move(next);
    suffix *= g;
  }
  GridValues r;
  r.shape = grid.shape();
  r.values = std::move(tensor);
  return r;
}

}  // namespace cqe
