#include "anderson/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "anderson/error.hpp"

namespace anderson {
namespace {

constexpr double kPi = std::numbers::pi;

double bessel_j(int nu, double x) { return std::cyl_bessel_j(double(nu), x); }

double bessel_j_prime(int nu, double x) {
  if (nu == 0) return -bessel_j(1, x);
  return bessel_j(nu - 1, x) - double(nu) / x * bessel_j(nu, x);
}

// Safeguarded Newton inside a sign-change bracket.
double refine_zero(int nu, double lo, double hi) {
  double flo = bessel_j(nu, lo);
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = bessel_j(nu, x);
    if (std::abs(fx) <= 1e-14) break;
    if ((fx < 0) == (flo < 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    if (hi - lo <= 4e-16 * hi) break;
    const double step = fx / bessel_j_prime(nu, x);
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  if (std::abs(bessel_j(nu, x)) > 1e-12)
    fail(ErrorCode::Numeric, "Bessel zero refinement failed for order " + std::to_string(nu));
  return x;
}

// Scans forward in unit steps from just past lo, which may itself be a zero
// (of J_nu or J_{nu-1}); neighbouring zeros there are more than 1 apart. Returns
// the bracket of the next sign change.
std::pair<double, double> scan_bracket(int nu, double lo) {
  lo += 0.5;
  const double f0 = bessel_j(nu, lo);
  double a = lo;
  for (double x = lo + 1.0;; x += 1.0) {
    if ((bessel_j(nu, x) < 0) != (f0 < 0)) return {a, x};
    a = x;
  }
}

double sum_small_first(const std::vector<double>& terms) {
  // Terms are ascending in lambda, so descending in size: add from the back.
  double sum = 0.0, comp = 0.0;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
    const double y = *it - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  return sum;
}

void certify(SpectralModel& m) {
  // Smallest t with tail bound below tolerance, by bisection on log t.
  double lo = 1e-12, hi = 1e3;
  if (weyl_tail_bound(m.area, m.cutoff_lambda, hi) > kSpectralTailTolerance)
    fail(ErrorCode::Range, "spectral cutoff too small to certify any t");
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    (weyl_tail_bound(m.area, m.cutoff_lambda, mid) > kSpectralTailTolerance ? lo : hi) = mid;
  }
  m.min_t = hi;
  m.tail_bound = weyl_tail_bound(m.area, m.cutoff_lambda, hi);
}

void check_t(const SpectralModel& m, double t) {
  require(t > 0.0, "spectral query: t must be positive");
  if (t < m.min_t * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "t=" << t << " is below the certified range t >= " << m.min_t
       << " of this spectral model (cutoff " << m.cutoff_lambda << ")";
    fail(ErrorCode::Range, os.str());
  }
}

}  // namespace

double weyl_tail_bound(double area, double cutoff, double t) {
  // sum_{lambda > L} e^{-t lambda} <= t int_L^inf N(lambda) e^{-t lambda} dlambda
  //                               <= A / 2pi (L + 1/t) e^{-t L}
  return area / (2.0 * kPi) * (cutoff + 1.0 / t) * std::exp(-t * cutoff);
}

double cutoff_for(double area, double t_min, double tolerance) {
  require(area > 0.0 && t_min > 0.0 && tolerance > 0.0, "cutoff_for: arguments must be positive");
  double lo = 0.0, hi = 1.0 / t_min;
  while (weyl_tail_bound(area, hi, t_min) > tolerance) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (weyl_tail_bound(area, mid, t_min) > tolerance ? lo : hi) = mid;
  }
  return hi;
}

SpectralModel rectangle_model(double a, double b, double cutoff_lambda) {
  require(a > 0.0 && b > 0.0 && cutoff_lambda > 0.0,
          "rectangle_model: dimensions and cutoff must be positive");
  SpectralModel m;
  std::ostringstream tag;
  tag.precision(17);
  tag << "rectangle width=" << a << " height=" << b;
  m.domain_tag = tag.str();
  m.area = a * b;
  m.cutoff_lambda = cutoff_lambda;
  const double cx = kPi * kPi / (2.0 * a * a), cy = kPi * kPi / (2.0 * b * b);
  for (long i = 1; cx * double(i * i) + cy <= cutoff_lambda; ++i) {
    const double ox = (i % 2) ? 8.0 * a / (double(i * i) * kPi * kPi) : 0.0;
    for (long j = 1;; ++j) {
      const double lambda = cx * double(i * i) + cy * double(j * j);
      if (lambda > cutoff_lambda) break;
      const double oy = (j % 2) ? 8.0 * b / (double(j * j) * kPi * kPi) : 0.0;
      m.modes.push_back({lambda, ox * oy});
    }
  }
  std::sort(m.modes.begin(), m.modes.end(),
            [](const SpectralMode& p, const SpectralMode& q) { return p.lambda < q.lambda; });
  certify(m);
  return m;
}

std::vector<std::vector<double>> bessel_zeros(double x_max) {
  require(x_max > 0.0 && x_max <= kMaxBesselArgument,
          "bessel_zeros: argument range exceeds the zero table");
  std::vector<std::vector<double>> zeros;
  // Each order keeps every zero <= x_max plus the first one above it; the
  // zeros of J_{nu-1} bracket those of J_nu by interlacing.
  std::vector<double> z0;
  for (double lo = 0.5;;) {
    const auto [a, b] = scan_bracket(0, lo);
    z0.push_back(refine_zero(0, a, b));
    if (z0.back() > x_max) break;
    lo = z0.back();
  }
  zeros.push_back(std::move(z0));
  for (int nu = 1;; ++nu) {
    const auto& prev = zeros.back();
    if (prev.front() > x_max) break;
    std::vector<double> cur;
    for (std::size_t k = 0;; ++k) {
      const double lo = prev[k];
      double root;
      if (k + 1 < prev.size()) {
        root = refine_zero(nu, lo, prev[k + 1]);
      } else {
        const auto [a, b] = scan_bracket(nu, lo);
        root = refine_zero(nu, a, b);
      }
      cur.push_back(root);
      if (root > x_max) break;
    }
    if (cur.front() > x_max) break;
    zeros.push_back(std::move(cur));
  }
  return zeros;
}

double disk_overlap_by_quadrature(double radius, double j) {
  using boost::math::quadrature::gauss_kronrod;
  auto mode = [&](double r) { return bessel_j(0, j * r / radius); };
  double err = 0.0;
  const double mass = 2.0 * kPi *
      gauss_kronrod<double, 61>::integrate([&](double r) { return mode(r) * r; }, 0.0, radius,
                                           15, 1e-14, &err);
  const double norm2 = 2.0 * kPi *
      gauss_kronrod<double, 61>::integrate([&](double r) { return mode(r) * mode(r) * r; }, 0.0,
                                           radius, 15, 1e-14, &err);
  return mass * mass / norm2;
}

SpectralModel disk_model(double radius, double cutoff_lambda) {
  require(radius > 0.0 && cutoff_lambda > 0.0, "disk_model: radius and cutoff must be positive");
  const double j_max = std::sqrt(2.0 * radius * radius * cutoff_lambda);
  if (j_max > kMaxBesselArgument) {
    std::ostringstream os;
    os << "disk_model: cutoff " << cutoff_lambda << " needs Bessel zeros up to " << j_max
       << ", beyond the table range " << kMaxBesselArgument;
    fail(ErrorCode::Range, os.str());
  }
  SpectralModel m;
  std::ostringstream tag;
  tag.precision(17);
  tag << "disk radius=" << radius;
  m.domain_tag = tag.str();
  m.area = kPi * radius * radius;
  m.cutoff_lambda = cutoff_lambda;
  const auto zeros = bessel_zeros(j_max);
  const double inv = 1.0 / (2.0 * radius * radius);
  for (std::size_t nu = 0; nu < zeros.size(); ++nu) {
    for (double j : zeros[nu]) {
      const double lambda = j * j * inv;
      if (lambda > cutoff_lambda) break;
      if (nu == 0) {
        m.modes.push_back({lambda, 4.0 * kPi * radius * radius / (j * j)});
      } else {
        m.modes.push_back({lambda, 0.0});
        m.modes.push_back({lambda, 0.0});
      }
    }
  }
  std::sort(m.modes.begin(), m.modes.end(),
            [](const SpectralMode& p, const SpectralMode& q) { return p.lambda < q.lambda; });
  // Cross-check the closed-form overlaps of the leading radial modes.
  for (std::size_t k = 0; k < std::min<std::size_t>(5, zeros[0].size()); ++k) {
    const double j = zeros[0][k];
    const double closed = 4.0 * kPi * radius * radius / (j * j);
    if (std::abs(disk_overlap_by_quadrature(radius, j) - closed) > 1e-8 * std::max(1.0, closed))
      fail(ErrorCode::Numeric, "disk_model: overlap normalisation check failed");
  }
  certify(m);
  return m;
}

std::optional<SpectralModel> spectral_model_for(const PlanarDomain& domain, double t_min) {
  if (const auto* r = std::get_if<Rectangle>(&domain.shape()))
    return rectangle_model(r->width, r->height, cutoff_for(domain.area(), t_min));
  if (const auto* d = std::get_if<Disk>(&domain.shape()))
    return disk_model(d->radius, cutoff_for(domain.area(), t_min));
  return std::nullopt;
}

double heat_trace(const SpectralModel& model, double t) {
  check_t(model, t);
  std::vector<double> terms;
  terms.reserve(model.modes.size());
  for (const auto& mode : model.modes) terms.push_back(std::exp(-t * mode.lambda));
  return sum_small_first(terms);
}

double heat_content(const SpectralModel& model, double t) {
  check_t(model, t);
  std::vector<double> terms;
  terms.reserve(model.modes.size());
  for (const auto& mode : model.modes)
    if (mode.overlap_sq > 0.0) terms.push_back(mode.overlap_sq * std::exp(-t * mode.lambda));
  return sum_small_first(terms);
}

double smooth_trace_asymptotic(double area, double length, double t) {
  require(t > 0.0, "smooth_trace_asymptotic: t must be positive");
  return area / (2.0 * kPi * t) - length / (4.0 * std::sqrt(2.0 * kPi)) / std::sqrt(t);
}

double content_asymptotic(double area, double length, double euler_char, double t) {
  require(t >= 0.0, "content_asymptotic: t must be non-negative");
  return area - std::sqrt(2.0) * length / std::sqrt(kPi) * std::sqrt(t) +
         kPi * euler_char / 2.0 * t;
}

double corner_constant(std::span<const double> interior_angles) {
  double c = 0.0;
  for (double theta : interior_angles) {
    require(theta > 0.0 && theta < 2.0 * kPi, "corner_constant: angle out of range");
    c += (kPi * kPi - theta * theta) / (24.0 * kPi * theta);
  }
  return c;
}

void save_model_csv(const SpectralModel& model, std::ostream& os) {
  const auto old = os.precision(17);
  os << "# domain=" << model.domain_tag << ", cutoff=" << model.cutoff_lambda
     << ", tail_bound=" << model.tail_bound << ", min_t=" << model.min_t
     << ", area=" << model.area << "\n";
  os << "lambda,overlap_sq\n";
  for (const auto& m : model.modes) os << m.lambda << ',' << m.overlap_sq << '\n';
  os.precision(old);
}

SpectralModel load_model_csv(std::istream& is) {
  SpectralModel m;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
    fail(ErrorCode::Schema, "spectral model CSV: missing '# domain=...' header");
  bool have_cutoff = false, have_tail = false;
  std::istringstream hs(line.substr(2));
  std::string field;
  while (std::getline(hs, field, ',')) {
    field.erase(0, field.find_first_not_of(' '));
    const auto eq = field.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Schema, "spectral model CSV: bad header field");
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    try {
      if (key == "domain") m.domain_tag = value;
      else if (key == "cutoff") m.cutoff_lambda = std::stod(value), have_cutoff = true;
      else if (key == "tail_bound") m.tail_bound = std::stod(value), have_tail = true;
      else if (key == "min_t") m.min_t = std::stod(value);
      else if (key == "area") m.area = std::stod(value);
    } catch (const std::exception&) {
      fail(ErrorCode::Schema, "spectral model CSV: bad value for " + key);
    }
  }
  if (!have_cutoff || !have_tail) fail(ErrorCode::Schema, "spectral model CSV: incomplete header");
  if (!std::getline(is, line) || line != "lambda,overlap_sq")
    fail(ErrorCode::Schema, "spectral model CSV: expected column line 'lambda,overlap_sq'");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorCode::Schema, "spectral model CSV: bad row");
    try {
      m.modes.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      fail(ErrorCode::Schema, "spectral model CSV: bad number in row");
    }
  }
  for (std::size_t i = 1; i < m.modes.size(); ++i)
    if (m.modes[i].lambda < m.modes[i - 1].lambda)
      fail(ErrorCode::Schema, "spectral model CSV: eigenvalues not ascending");
  return m;
}

}  // namespace anderson
