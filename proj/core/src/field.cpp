#include "torus/field.hpp"

#include <fftw3.h>

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>

namespace torus {

namespace {

std::atomic<double> g_trunc_loss{0.0};

void bump_trunc_loss(double v) {
  double cur = g_trunc_loss.load(std::memory_order_relaxed);
  while (cur < v &&
         !g_trunc_loss.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
  }
}

size_t ipow(size_t b, int e) {
  size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// FFTW plans keyed by (grid, dim, sign). Plans are created out-of-place with
// FFTW_UNALIGNED so fftw_execute_dft can run on any caller buffers; execution
// on distinct arrays is thread-safe.
class PlanCache {
 public:
  fftw_plan get(int grid, int dim, int sign) {
    std::lock_guard<std::mutex> lk(mu_);
    auto key = std::make_tuple(grid, dim, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    size_t n = ipow(size_t(grid), dim);
    std::vector<fftw_complex> in(n), out(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p;
    if (dim == 1) {
      p = fftw_plan_dft_1d(grid, in.data(), out.data(), sign, flags);
    } else if (dim == 2) {
      p = fftw_plan_dft_2d(grid, grid, in.data(), out.data(), sign, flags);
    } else {
      std::vector<int> dims(size_t(dim), grid);
      p = fftw_plan_dft(dim, dims.data(), in.data(), out.data(), sign, flags);
    }
    plans_[key] = p;
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache c;
  return c;
}

void run_fft(std::vector<Complex>& data, int grid, int dim, int sign) {
  fftw_plan p = plan_cache().get(grid, dim, sign);
  std::vector<Complex> out(data.size());
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  data = std::move(out);
}

}  // namespace

double Mode::abs() const { return std::sqrt(norm2()); }

Freq::Freq(Eigen::VectorXd omega, double gamma, double tau, int check_cutoff)
    : omega_(std::move(omega)), gamma_(gamma), tau_(tau) {
  if (gamma_ <= 0 || tau_ <= 0) throw ConfigError("Freq: gamma and tau must be positive");
  const int d = int(omega_.size());
  // Walk the whole mode box once; d <= 2 keeps this cheap.
  std::vector<int> s(size_t(d), -check_cutoff);
  while (true) {
    double dot = 0, n2 = 0;
    bool zero = true;
    for (int i = 0; i < d; ++i) {
      dot += omega_[i] * s[size_t(i)];
      n2 += double(s[size_t(i)]) * s[size_t(i)];
      if (s[size_t(i)] != 0) zero = false;
    }
    if (!zero) {
      double bound = gamma_ * std::pow(std::sqrt(n2), -tau_);
      if (std::abs(dot) < bound)
        throw DiophantineViolation("Freq: |omega.s| < gamma |s|^-tau at a checked mode");
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++s[size_t(i)] <= check_cutoff) break;
      s[size_t(i)] = -check_cutoff;
    }
    if (i == d) break;
  }
}

Field::Field(int dim, int cutoff) : dim_(dim), cutoff_(cutoff) {
  c_.assign(ipow(size_t(2 * cutoff + 1), dim), Complex(0, 0));
}

Field Field::constant(int dim, int cutoff, double v) {
  Field f(dim, cutoff);
  f.at(f.zero_mode()) = v;
  return f;
}

Field Field::harmonic_cos(int dim, int cutoff, const Mode& s, double amp) {
  Field f(dim, cutoff);
  f.at(s) += Complex(amp / 2, 0);
  f.at(s.negated()) += Complex(amp / 2, 0);
  return f;
}

Field Field::harmonic_sin(int dim, int cutoff, const Mode& s, double amp) {
  Field f(dim, cutoff);
  f.at(s) += Complex(0, -amp / 2);
  f.at(s.negated()) += Complex(0, amp / 2);
  return f;
}

bool Field::in_range(const Mode& m) const {
  for (int i = 0; i < dim_; ++i)
    if (m[i] < -cutoff_ || m[i] > cutoff_) return false;
  return true;
}

size_t Field::index(const Mode& m) const {
  size_t idx = 0;
  const size_t w = size_t(2 * cutoff_ + 1);
  for (int i = 0; i < dim_; ++i) idx = idx * w + size_t(m[i] + cutoff_);
  return idx;
}

Mode Field::mode_of(size_t flat) const {
  Mode m;
  m.dim = dim_;
  const size_t w = size_t(2 * cutoff_ + 1);
  for (int i = dim_ - 1; i >= 0; --i) {
    m.s[size_t(i)] = int(flat % w) - cutoff_;
    flat /= w;
  }
  return m;
}

void Field::for_each_mode(const std::function<void(const Mode&, Complex&)>& f) {
  for (size_t i = 0; i < c_.size(); ++i) f(mode_of(i), c_[i]);
}

void Field::for_each_mode(
    const std::function<void(const Mode&, const Complex&)>& f) const {
  for (size_t i = 0; i < c_.size(); ++i) f(mode_of(i), c_[i]);
}

Field& Field::operator+=(const Field& o) {
  if (dim_ != o.dim_ || cutoff_ != o.cutoff_)
    throw ShapeMismatch("Field +=: incompatible shapes");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  if (dim_ != o.dim_ || cutoff_ != o.cutoff_)
    throw ShapeMismatch("Field -=: incompatible shapes");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Field& Field::operator*=(double a) {
  for (auto& v : c_) v *= a;
  return *this;
}

double Field::reality_defect() const {
  double worst = 0;
  for (size_t i = 0; i < c_.size(); ++i) {
    Mode m = mode_of(i);
    Complex d = c_[i] - std::conj(c_[index(m.negated())]);
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

void Field::enforce_reality() {
  for (size_t i = 0; i < c_.size(); ++i) {
    Mode m = mode_of(i);
    size_t j = index(m.negated());
    if (j < i) continue;
    Complex avg = 0.5 * (c_[i] + std::conj(c_[j]));
    c_[i] = avg;
    c_[j] = std::conj(avg);
  }
}

double Field::evaluate_at(const Eigen::VectorXd& xi) const {
  Complex acc(0, 0);
  for (size_t i = 0; i < c_.size(); ++i) {
    Mode m = mode_of(i);
    double ph = 0;
    for (int k = 0; k < dim_; ++k) ph += m[k] * xi[k];
    acc += c_[i] * std::polar(1.0, ph);
  }
  return acc.real();
}

Field Field::truncated(int new_cutoff) const {
  Field g(dim_, new_cutoff);
  double lost = 0;
  for (size_t i = 0; i < c_.size(); ++i) {
    Mode m = mode_of(i);
    if (g.in_range(m))
      g.at(m) = c_[i];
    else
      lost += std::abs(c_[i]);
  }
  bump_trunc_loss(lost);
  return g;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field f) { return f *= a; }
Field operator-(Field f) { return f *= -1.0; }

int default_product_grid(int cutoff) {
  int g = 3 * cutoff + 4;
  // FFTW handles any size; stick to even sizes for tidy Nyquist handling.
  if (g % 2) ++g;
  return g;
}

std::vector<Complex> to_grid(const Field& f, int grid) {
  const int d = f.dim();
  if (grid < 2 * f.cutoff() + 1)
    throw CutoffOverflow("to_grid: grid smaller than spectral support");
  std::vector<Complex> data(ipow(size_t(grid), d), Complex(0, 0));
  // Scatter coefficients into wrapped FFT bins, then inverse transform.
  f.for_each_mode([&](const Mode& m, const Complex& v) {
    size_t idx = 0;
    for (int i = 0; i < d; ++i) {
      int b = m[i] >= 0 ? m[i] : m[i] + grid;
      idx = idx * size_t(grid) + size_t(b);
    }
    data[idx] = v;
  });
  run_fft(data, grid, d, FFTW_BACKWARD);
  return data;
}

Field from_grid(const std::vector<Complex>& values, int grid, int dim, int cutoff) {
  if (values.size() != ipow(size_t(grid), dim))
    throw ShapeMismatch("from_grid: value count != grid^dim");
  if (grid < 2 * cutoff + 1)
    throw CutoffOverflow("from_grid: requested cutoff exceeds grid");
  std::vector<Complex> data = values;
  run_fft(data, grid, dim, FFTW_FORWARD);
  const double scale = 1.0 / double(ipow(size_t(grid), dim));
  Field f(dim, cutoff);
  double lost = 0;
  std::vector<int> bin(size_t(dim), 0);
  for (size_t flat = 0; flat < data.size(); ++flat) {
    size_t rem = flat;
    bool keep = true;
    Mode m;
    m.dim = dim;
    for (int i = dim - 1; i >= 0; --i) {
      int b = int(rem % size_t(grid));
      rem /= size_t(grid);
      int s = b <= grid / 2 ? b : b - grid;
      if (s < -cutoff || s > cutoff) keep = false;
      m.s[size_t(i)] = s;
    }
    if (keep)
      f.at(m) = data[flat] * scale;
    else
      lost += std::abs(data[flat]) * scale;
  }
  bump_trunc_loss(lost);
  return f;
}

Field field_mul(const Field& a, const Field& b) {
  if (a.dim() != b.dim()) throw ShapeMismatch("field_mul: dim mismatch");
  const int K = std::max(a.cutoff(), b.cutoff());
  const int grid = default_product_grid(K);
  std::vector<Complex> ga = to_grid(a, grid);
  std::vector<Complex> gb = to_grid(b, grid);
  for (size_t i = 0; i < ga.size(); ++i) ga[i] *= gb[i];
  return from_grid(ga, grid, a.dim(), K);
}

Field dpartial(const Field& f, const Freq& freq) {
  Field g = f;
  g.for_each_mode([&](const Mode& m, Complex& v) {
    v *= Complex(0, freq.dot(m));
  });
  return g;
}

Field deriv(const Field& f, int j) {
  Field g = f;
  g.for_each_mode([&](const Mode& m, Complex& v) { v *= Complex(0, m[j]); });
  return g;
}

MeanStar split_mean(const Field& f) {
  MeanStar r{0.0, f, 0.0};
  Complex m = f.mean_complex();
  r.mean = m.real();
  r.imag_residue = std::abs(m.imag());
  r.star.at(f.zero_mode()) = Complex(0, 0);
  return r;
}

double norm_weighted(const Field& f, double sigma, int d) {
  double acc = 0;
  f.for_each_mode([&](const Mode& m, const Complex& v) {
    double s = m.abs();
    acc += std::pow(1.0 + s, d) * std::exp(sigma * s) * std::abs(v);
  });
  return acc;
}

double norm_sobolev(const Field& f, double s) {
  double acc = 0;
  f.for_each_mode([&](const Mode& m, const Complex& v) {
    acc += std::pow(1.0 + m.norm2(), s) * std::norm(v);
  });
  return std::sqrt(acc);
}

double min_divisor(const Freq& freq, int cutoff) {
  Field probe(freq.dim(), cutoff);
  double worst = std::numeric_limits<double>::infinity();
  probe.for_each_mode([&](const Mode& m, Complex&) {
    bool zero = true;
    for (int i = 0; i < m.dim; ++i)
      if (m[i] != 0) zero = false;
    if (!zero) worst = std::min(worst, std::abs(freq.dot(m)));
  });
  return worst;
}

double truncation_loss() { return g_trunc_loss.load(std::memory_order_relaxed); }
void reset_truncation_loss() { g_trunc_loss.store(0.0, std::memory_order_relaxed); }

// ---------------------------------------------------------------------------

VField::VField(int rows, int dim, int cutoff) {
  c_.assign(size_t(rows), Field(dim, cutoff));
}

VField& VField::operator+=(const VField& o) {
  if (rows() != o.rows()) throw ShapeMismatch("VField +=");
  for (int i = 0; i < rows(); ++i) c_[size_t(i)] += o[i];
  return *this;
}

VField& VField::operator-=(const VField& o) {
  if (rows() != o.rows()) throw ShapeMismatch("VField -=");
  for (int i = 0; i < rows(); ++i) c_[size_t(i)] -= o[i];
  return *this;
}

Eigen::VectorXd VField::mean() const {
  Eigen::VectorXd v(rows());
  for (int i = 0; i < rows(); ++i) v[i] = c_[size_t(i)].mean();
  return v;
}

double VField::norm_weighted(double sigma, int d) const {
  double a = 0;
  for (int i = 0; i < rows(); ++i)
    a = std::max(a, torus::norm_weighted(c_[size_t(i)], sigma, d));
  return a;
}

Eigen::VectorXd VField::evaluate_at(const Eigen::VectorXd& xi) const {
  Eigen::VectorXd v(rows());
  for (int i = 0; i < rows(); ++i) v[i] = c_[size_t(i)].evaluate_at(xi);
  return v;
}

VField operator+(VField a, const VField& b) { return a += b; }
VField operator-(VField a, const VField& b) { return a -= b; }
VField operator*(double a, VField f) {
  for (int i = 0; i < f.rows(); ++i) f[i] *= a;
  return f;
}

MField::MField(int rows, int cols, int dim, int cutoff) : rows_(rows), cols_(cols) {
  c_.assign(size_t(rows * cols), Field(dim, cutoff));
}

MField MField::transposed() const {
  MField t;
  t.rows_ = cols_;
  t.cols_ = rows_;
  t.c_.resize(c_.size());
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t.c_[size_t(j * rows_ + i)] = (*this)(i, j);
  return t;
}

MField& MField::operator+=(const MField& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeMismatch("MField +=");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

MField& MField::operator-=(const MField& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeMismatch("MField -=");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Eigen::MatrixXd MField::mean() const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).mean();
  return m;
}

double MField::norm_weighted(double sigma, int d) const {
  double a = 0;
  for (const auto& f : c_) a = std::max(a, torus::norm_weighted(f, sigma, d));
  return a;
}

Eigen::MatrixXd MField::evaluate_at(const Eigen::VectorXd& xi) const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).evaluate_at(xi);
  return m;
}

MField operator+(MField a, const MField& b) { return a += b; }
MField operator-(MField a, const MField& b) { return a -= b; }
MField operator*(double a, MField f) {
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j) f(i, j) *= a;
  return f;
}

VField mat_vec(const MField& A, const VField& x) {
  if (A.cols() != x.rows()) throw ShapeMismatch("mat_vec");
  VField y(A.rows(), A(0, 0).dim(), A(0, 0).cutoff());
  for (int i = 0; i < A.rows(); ++i) {
    Field acc = field_mul(A(i, 0), x[0]);
    for (int j = 1; j < A.cols(); ++j) acc += field_mul(A(i, j), x[j]);
    y[i] = acc;
  }
  return y;
}

MField mat_mat(const MField& A, const MField& B) {
  if (A.cols() != B.rows()) throw ShapeMismatch("mat_mat");
  MField C(A.rows(), B.cols(), A(0, 0).dim(), A(0, 0).cutoff());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j) {
      Field acc = field_mul(A(i, 0), B(0, j));
      for (int k = 1; k < A.cols(); ++k) acc += field_mul(A(i, k), B(k, j));
      C(i, j) = acc;
    }
  return C;
}

VField scale(const Field& a, const VField& x) {
  VField y = x;
  for (int i = 0; i < x.rows(); ++i) y[i] = field_mul(a, x[i]);
  return y;
}

MField scale(const Field& a, const MField& X) {
  MField Y = X;
  for (int i = 0; i < X.rows(); ++i)
    for (int j = 0; j < X.cols(); ++j) Y(i, j) = field_mul(a, X(i, j));
  return Y;
}

Field dot(const VField& a, const VField& b) {
  if (a.rows() != b.rows()) throw ShapeMismatch("dot");
  Field acc = field_mul(a[0], b[0]);
  for (int i = 1; i < a.rows(); ++i) acc += field_mul(a[i], b[i]);
  return acc;
}

MField jacobian(const VField& f) {
  const int d = f[0].dim();
  MField J(f.rows(), d, d, f[0].cutoff());
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < d; ++j) J(i, j) = deriv(f[i], j);
  return J;
}

MField gradient(const VField& f) { return jacobian(f).transposed(); }

VField grad_scalar(const Field& f) {
  const int d = f.dim();
  VField g(d, d, f.cutoff());
  for (int j = 0; j < d; ++j) g[j] = deriv(f, j);
  return g;
}

VField dpartial(const VField& f, const Freq& freq) {
  VField g = f;
  for (int i = 0; i < f.rows(); ++i) g[i] = dpartial(f[i], freq);
  return g;
}

MField dpartial(const MField& f, const Freq& freq) {
  MField g = f;
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j) g(i, j) = dpartial(f(i, j), freq);
  return g;
}

MField deriv(const MField& f, int j) {
  MField g = f;
  for (int r = 0; r < f.rows(); ++r)
    for (int c = 0; c < f.cols(); ++c) g(r, c) = deriv(f(r, c), j);
  return g;
}

MField pointwise_inverse(const MField& A, int grid, double floor) {
  const int n = A.rows();
  if (n != A.cols()) throw ShapeMismatch("pointwise_inverse: square matrices only");
  const int d = A(0, 0).dim();
  const int K = A(0, 0).cutoff();
  std::vector<std::vector<Complex>> g(size_t(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g[size_t(i * n + j)] = to_grid(A(i, j), grid);
  const size_t npt = g[0].size();
  std::vector<std::vector<Complex>> out(size_t(n * n),
                                        std::vector<Complex>(npt));
  Eigen::MatrixXd M(n, n), Minv(n, n);
  double det_lo = std::numeric_limits<double>::infinity();
  double det_hi = -std::numeric_limits<double>::infinity();
  for (size_t p = 0; p < npt; ++p) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = g[size_t(i * n + j)][p].real();
    double det = M.determinant();
    det_lo = std::min(det_lo, det);
    det_hi = std::max(det_hi, det);
    if (std::abs(det) < floor || det_lo * det_hi < 0)
      throw ChartSingular("pointwise_inverse: singular determinant on grid");
    Minv = M.inverse();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[size_t(i * n + j)][p] = Minv(i, j);
  }
  MField R(n, n, d, K);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      R(i, j) = from_grid(out[size_t(i * n + j)], grid, d, K);
  return R;
}

Field pointwise_divide(const Field& a, const Field& b, int grid, double floor) {
  std::vector<Complex> ga = to_grid(a, grid);
  std::vector<Complex> gb = to_grid(b, grid);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < ga.size(); ++i) {
    double den = gb[i].real();
    lo = std::min(lo, den);
    hi = std::max(hi, den);
    if (std::abs(den) < floor || lo * hi < 0)
      throw ChartSingular("pointwise_divide: denominator vanishes on grid");
    ga[i] /= den;
  }
  return from_grid(ga, grid, a.dim(), a.cutoff());
}

VField pointwise_solve(const MField& A, const VField& b, int grid, double floor) {
  const int n = A.rows();
  if (n != A.cols() || n != b.rows()) throw ShapeMismatch("pointwise_solve");
  const int d = A(0, 0).dim();
  const int K = b[0].cutoff();
  std::vector<std::vector<Complex>> ga(static_cast<size_t>(n * n));
  std::vector<std::vector<Complex>> gb(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    gb[size_t(i)] = to_grid(b[i], grid);
    for (int j = 0; j < n; ++j) ga[size_t(i * n + j)] = to_grid(A(i, j), grid);
  }
  const size_t npt = gb[0].size();
  std::vector<std::vector<Complex>> out(static_cast<size_t>(n), std::vector<Complex>(npt));
  Eigen::MatrixXd M(n, n);
  Eigen::VectorXd rhs(n), x(n);
  for (size_t p = 0; p < npt; ++p) {
    for (int i = 0; i < n; ++i) {
      rhs[i] = gb[size_t(i)][p].real();
      for (int j = 0; j < n; ++j) M(i, j) = ga[size_t(i * n + j)][p].real();
    }
    if (std::abs(M.determinant()) < floor)
      throw ChartSingular("pointwise_solve: singular matrix on grid");
    x = M.partialPivLu().solve(rhs);
    for (int i = 0; i < n; ++i) out[size_t(i)][p] = x[i];
  }
  VField r(n, d, K);
  for (int i = 0; i < n; ++i) r[i] = from_grid(out[size_t(i)], grid, d, K);
  return r;
}

MField pointwise_solve(const MField& A, const MField& B, int grid, double floor) {
  const int n = A.rows();
  if (n != A.cols() || n != B.rows()) throw ShapeMismatch("pointwise_solve(mat)");
  const int d = A(0, 0).dim();
  const int K = B(0, 0).cutoff();
  const int m = B.cols();
  std::vector<std::vector<Complex>> ga(static_cast<size_t>(n * n));
  std::vector<std::vector<Complex>> gb(static_cast<size_t>(n * m));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ga[size_t(i * n + j)] = to_grid(A(i, j), grid);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) gb[size_t(i * m + j)] = to_grid(B(i, j), grid);
  const size_t npt = ga[0].size();
  std::vector<std::vector<Complex>> out(static_cast<size_t>(n * m), std::vector<Complex>(npt));
  Eigen::MatrixXd M(n, n), R(n, m), X(n, m);
  for (size_t p = 0; p < npt; ++p) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) = ga[size_t(i * n + j)][p].real();
      for (int j = 0; j < m; ++j) R(i, j) = gb[size_t(i * m + j)][p].real();
    }
    if (std::abs(M.determinant()) < floor)
      throw ChartSingular("pointwise_solve(mat): singular matrix on grid");
    X = M.partialPivLu().solve(R);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) out[size_t(i * m + j)][p] = X(i, j);
  }
  MField res(n, m, d, K);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      res(i, j) = from_grid(out[size_t(i * m + j)], grid, d, K);
  return res;
}

}  // namespace torus
