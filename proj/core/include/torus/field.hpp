#ifndef TORUS_FIELD_HPP
#define TORUS_FIELD_HPP

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "torus/errors.hpp"

namespace torus {

using Complex = std::complex<double>;

// Multi-index s in Z^d, d = n-1 (d <= 2 exercised in practice, code is generic).
struct Mode {
  std::array<int, 4> s{};
  int dim = 0;

  int operator[](int i) const { return s[static_cast<size_t>(i)]; }
  double norm2() const {
    double a = 0;
    for (int i = 0; i < dim; ++i) a += double(s[size_t(i)]) * s[size_t(i)];
    return a;
  }
  double abs() const;
  Mode negated() const {
    Mode m = *this;
    for (int i = 0; i < dim; ++i) m.s[size_t(i)] = -m.s[size_t(i)];
    return m;
  }
};

// Diophantine frequency vector with constants (gamma, tau).
// Invariant |omega.s| >= gamma*|s|^-tau is checked over |s|_inf <= check_cutoff
// at construction.
class Freq {
 public:
  Freq(Eigen::VectorXd omega, double gamma, double tau, int check_cutoff = 64);

  const Eigen::VectorXd& omega() const { return omega_; }
  double gamma() const { return gamma_; }
  double tau() const { return tau_; }
  int dim() const { return int(omega_.size()); }

  double dot(const Mode& m) const {
    double a = 0;
    for (int i = 0; i < m.dim; ++i) a += omega_[i] * m[i];
    return a;
  }

 private:
  Eigen::VectorXd omega_;
  double gamma_;
  double tau_;
};

// Truncated Fourier series on T^d with complex coefficients indexed by
// s in [-K, K]^d. Real-analytic data keeps the symmetry c(-s) = conj(c(s));
// operations preserve it up to roundoff and `reality_defect` measures the
// violation.
class Field {
 public:
  Field() = default;
  Field(int dim, int cutoff);

  static Field constant(int dim, int cutoff, double v);
  // cos(s.xi) with unit amplitude.
  static Field harmonic_cos(int dim, int cutoff, const Mode& s, double amp = 1.0);
  static Field harmonic_sin(int dim, int cutoff, const Mode& s, double amp = 1.0);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  int n_modes() const { return int(c_.size()); }

  Complex& at(const Mode& m) { return c_[index(m)]; }
  const Complex& at(const Mode& m) const { return c_[index(m)]; }
  Complex coeff(const Mode& m) const {
    return in_range(m) ? c_[index(m)] : Complex(0, 0);
  }

  void for_each_mode(const std::function<void(const Mode&, Complex&)>& f);
  void for_each_mode(const std::function<void(const Mode&, const Complex&)>& f) const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a);

  bool in_range(const Mode& m) const;
  size_t index(const Mode& m) const;
  Mode mode_of(size_t flat) const;

  double mean() const { return c_[index(zero_mode())].real(); }
  Complex mean_complex() const { return c_[index(zero_mode())]; }
  Mode zero_mode() const {
    Mode m;
    m.dim = dim_;
    return m;
  }

  // Largest violation of c(-s) = conj(c(s)).
  double reality_defect() const;
  void enforce_reality();

  double evaluate_at(const Eigen::VectorXd& xi) const;

  Field truncated(int new_cutoff) const;

 private:
  int dim_ = 0;
  int cutoff_ = 0;
  std::vector<Complex> c_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);
Field operator-(Field f);

// Dealiased product: coefficients convolved on a padded grid, truncated back
// to max(cutoff a, cutoff b). Truncation loss feeds the process-wide metric
// read by truncation_loss().
Field field_mul(const Field& a, const Field& b);

// omega . grad, the operator that owns the small divisors. Mean mode -> 0.
Field dpartial(const Field& f, const Freq& freq);
// Plain partial derivative along coordinate j.
Field deriv(const Field& f, int j);

struct MeanStar {
  double mean;
  Field star;
  double imag_residue;
};
MeanStar split_mean(const Field& f);

// Sum_s (1+|s|)^d e^{sigma |s|} |c(s)|, the computable stand-in for the
// analytic strip norms.
double norm_weighted(const Field& f, double sigma, int d);
// (Sum_m (1+|m|^2)^s |c(m)|^2)^{1/2}
double norm_sobolev(const Field& f, double s);

// Worst divisor diagnostics: min over retained nonzero modes of |omega.s|.
double min_divisor(const Freq& freq, int cutoff);

double truncation_loss();
void reset_truncation_loss();

// ---------------------------------------------------------------------------
// Shaped fields: thin layers over std::vector<Field>.

class VField {
 public:
  VField() = default;
  VField(int rows, int dim, int cutoff);
  explicit VField(std::vector<Field> comps) : c_(std::move(comps)) {}

  int rows() const { return int(c_.size()); }
  Field& operator[](int i) { return c_[size_t(i)]; }
  const Field& operator[](int i) const { return c_[size_t(i)]; }

  VField& operator+=(const VField& o);
  VField& operator-=(const VField& o);

  Eigen::VectorXd mean() const;
  double norm_weighted(double sigma, int d) const;
  Eigen::VectorXd evaluate_at(const Eigen::VectorXd& xi) const;

 private:
  std::vector<Field> c_;
};

VField operator+(VField a, const VField& b);
VField operator-(VField a, const VField& b);
VField operator*(double a, VField f);

class MField {
 public:
  MField() = default;
  MField(int rows, int cols, int dim, int cutoff);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Field& operator()(int i, int j) { return c_[size_t(i * cols_ + j)]; }
  const Field& operator()(int i, int j) const { return c_[size_t(i * cols_ + j)]; }

  MField transposed() const;
  MField& operator+=(const MField& o);
  MField& operator-=(const MField& o);

  Eigen::MatrixXd mean() const;
  double norm_weighted(double sigma, int d) const;
  Eigen::MatrixXd evaluate_at(const Eigen::VectorXd& xi) const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Field> c_;
};

MField operator+(MField a, const MField& b);
MField operator-(MField a, const MField& b);
MField operator*(double a, MField f);

// Mode-wise linear algebra through dealiased products.
VField mat_vec(const MField& A, const VField& x);
MField mat_mat(const MField& A, const MField& B);
VField scale(const Field& a, const VField& x);
MField scale(const Field& a, const MField& X);
Field dot(const VField& a, const VField& b);

// Jacobian f' with entries (i,j) = d f_i / d xi_j, and gradient = (f')^T.
MField jacobian(const VField& f);
MField gradient(const VField& f);
VField grad_scalar(const Field& f);

VField dpartial(const VField& f, const Freq& freq);
MField dpartial(const MField& f, const Freq& freq);
MField deriv(const MField& f, int j);

// ---------------------------------------------------------------------------
// Grid transforms (FFT based, pseudo-spectral kitchen).

// Values of f on the uniform M^d grid, xi_j = 2 pi k / M.
std::vector<Complex> to_grid(const Field& f, int grid);
// Analysis back to a K-truncated field; modes above K are dropped (their mass
// accumulates in the truncation-loss metric).
Field from_grid(const std::vector<Complex>& values, int grid, int dim, int cutoff);

int default_product_grid(int cutoff);

// Pointwise 2x2 / dxd matrix inversion on a grid with spectral re-projection.
// Throws ChartSingular when |det| dips below `floor` anywhere on the grid.
MField pointwise_inverse(const MField& A, int grid, double floor);
// Pointwise division a/b with the same guard on |b|.
Field pointwise_divide(const Field& a, const Field& b, int grid, double floor);
// Grid-pointwise solves A(p) x(p) = b(p); exact for band-limited solutions,
// unlike truncating A^{-1} first.
VField pointwise_solve(const MField& A, const VField& b, int grid, double floor);
MField pointwise_solve(const MField& A, const MField& B, int grid, double floor);

}  // namespace torus

#endif
