#include "torus/hamiltonian.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "torus/toml_lite.hpp"

namespace torus {

namespace {

// Term with derivatives applied symbolically: coefficient, reduced powers and
// the trig phase advance q (trig^(q)(th) = trig(th + q pi/2)).
struct DerivedTerm {
  double coef = 0;
  std::vector<int> ypow;
  int z2pow = 0;
  std::vector<int> xmode;
  int z1mode = 0;
  bool is_sin = false;
  int q = 0;
};

bool derive_term(const HamTerm& t, const DerivOrder& d, double coef_scale,
                 DerivedTerm& out) {
  out.coef = t.coef * coef_scale;
  out.ypow = t.ypow;
  out.z2pow = t.z2pow;
  out.xmode = t.xmode;
  out.z1mode = t.z1mode;
  out.is_sin = t.is_sin;
  out.q = 0;
  for (int j : d.x) {
    if (t.xmode.empty() || t.xmode[size_t(j)] == 0) return false;
    out.coef *= t.xmode[size_t(j)];
    out.q += 1;
  }
  for (int i = 0; i < d.z1; ++i) {
    if (t.z1mode == 0) return false;
    out.coef *= t.z1mode;
    out.q += 1;
  }
  for (int a : d.y) {
    if (out.ypow[size_t(a)] == 0) return false;
    out.coef *= out.ypow[size_t(a)];
    out.ypow[size_t(a)] -= 1;
  }
  for (int i = 0; i < d.z2; ++i) {
    if (out.z2pow == 0) return false;
    out.coef *= out.z2pow;
    out.z2pow -= 1;
  }
  return out.coef != 0;
}

double trig_q(double theta, int q, bool is_sin) {
  double t = theta + 0.5 * M_PI * q;
  return is_sin ? std::sin(t) : std::cos(t);
}

// Pointwise contribution of the modification slot m z1 + (M/2) z1^2 under the
// derivative request.
bool mod_contribution(double m, double M, const DerivOrder& d, int& kind) {
  if ((m == 0 && M == 0) || !d.x.empty() || !d.y.empty() || d.z2 > 0) return false;
  if (d.z1 > 2) return false;
  kind = d.z1;
  return true;
}

struct EmbGrids {
  int grid = 0;
  int dim = 0;
  std::vector<std::vector<Complex>> u, v;  // n-1 each
  std::vector<std::vector<Complex>> w;     // 2
};

EmbGrids embed_grids(const Embedding& emb, int grid) {
  EmbGrids g;
  g.grid = grid;
  g.dim = emb.u[0].dim();
  for (int i = 0; i < emb.u.rows(); ++i) g.u.push_back(to_grid(emb.u[i], grid));
  for (int i = 0; i < emb.v.rows(); ++i) g.v.push_back(to_grid(emb.v[i], grid));
  for (int i = 0; i < 2; ++i) g.w.push_back(to_grid(emb.w[i], grid));
  return g;
}

void grid_coords(int flat, int grid, int dim, double* xi) {
  for (int i = dim - 1; i >= 0; --i) {
    xi[i] = 2.0 * M_PI * double(flat % grid) / double(grid);
    flat /= grid;
  }
}

Field eval_derived(const HamiltonianSpec& H, const std::vector<DerivedTerm>& terms,
                   const DerivOrder& d, const EmbGrids& g, int cutoff) {
  const int dim = g.dim;
  size_t npts = g.u[0].size();
  std::vector<Complex> acc(npts, Complex(0, 0));
  double xi[4];
  for (size_t p = 0; p < npts; ++p) {
    grid_coords(int(p), g.grid, dim, xi);
    double val = 0;
    for (const auto& t : terms) {
      double theta = 0;
      if (!t.xmode.empty())
        for (int i = 0; i < dim; ++i)
          theta += t.xmode[size_t(i)] * (xi[i] + g.u[size_t(i)][p].real());
      theta += t.z1mode * g.w[0][p].real();
      double term = t.coef * trig_q(theta, t.q, t.is_sin);
      for (int i = 0; i < dim; ++i)
        for (int r = 0; r < t.ypow[size_t(i)]; ++r) term *= g.v[size_t(i)][p].real();
      for (int r = 0; r < t.z2pow; ++r) term *= g.w[1][p].real();
      val += term;
    }
    acc[p] = val;
  }
  int kind = -1;
  if (mod_contribution(H.mod_m(), H.mod_M(), d, kind)) {
    for (size_t p = 0; p < npts; ++p) {
      double w1 = g.w[0][p].real();
      double add = 0;
      if (kind == 0) add = H.mod_m() * w1 + 0.5 * H.mod_M() * w1 * w1;
      if (kind == 1) add = H.mod_m() + H.mod_M() * w1;
      if (kind == 2) add = H.mod_M();
      acc[p] += add;
    }
  }
  Field f = from_grid(acc, g.grid, dim, cutoff);
  f.enforce_reality();
  return f;
}

Field eval_with(const HamiltonianSpec& H, const DerivOrder& d, const EmbGrids& g,
                int cutoff) {
  std::vector<DerivedTerm> terms;
  DerivedTerm dt;
  for (const auto& t : H.h0_terms())
    if (derive_term(t, d, 1.0, dt)) terms.push_back(dt);
  for (const auto& t : H.h1_terms())
    if (derive_term(t, d, H.epsilon(), dt)) terms.push_back(dt);
  return eval_derived(H, terms, d, g, cutoff);
}

int composition_grid(int cutoff, int emb_cutoff, int requested) {
  int needed = 2 * (cutoff + emb_cutoff) + 2;
  int grid = requested > 0 ? requested : needed;
  if (grid % 2) ++grid;
  if (grid < needed)
    throw CutoffOverflow("eval_composed: working grid too small for cutoff");
  return grid;
}

}  // namespace

HamiltonianSpec::HamiltonianSpec(int n, std::vector<HamTerm> h0,
                                 std::vector<HamTerm> h1, double epsilon, Freq freq)
    : n_(n), h0_(std::move(h0)), h1_(std::move(h1)), eps_(epsilon), freq_(std::move(freq)) {
  validate();
}

void HamiltonianSpec::validate() const {
  const int d = n_ - 1;
  if (d < 1) throw ConfigError("HamiltonianSpec: need n >= 2");
  if (freq_.dim() != d) throw ConfigError("HamiltonianSpec: omega length != n-1");
  for (const auto& t : h0_) {
    if (int(t.ypow.size()) != d) throw ConfigError("h0 term: ypow length != n-1");
    if (!t.xmode.empty() || t.z1mode != 0)
      throw ConfigError("h0 term: must not depend on x or z1");
  }
  for (const auto& t : h1_) {
    if (int(t.ypow.size()) != d) throw ConfigError("h1 term: ypow length != n-1");
    if (!t.xmode.empty() && int(t.xmode.size()) != d)
      throw ConfigError("h1 term: xmode length != n-1");
  }
  // H.2 normalization at the origin: grad_y H0 = omega, d_{z2} H0 = 0,
  // d2_{z2 z2} H0 = 1.
  Eigen::VectorXd gy = Eigen::VectorXd::Zero(d);
  double gz2 = 0, hz2z2 = 0;
  for (const auto& t : h0_) {
    int ysum = 0;
    for (int a : t.ypow) ysum += a;
    if (t.z2pow == 0 && ysum == 1)
      for (int i = 0; i < d; ++i)
        if (t.ypow[size_t(i)] == 1) gy[i] += t.coef;
    if (t.z2pow == 1 && ysum == 0) gz2 += t.coef;
    if (t.z2pow == 2 && ysum == 0) hz2z2 += 2 * t.coef;
  }
  if ((gy - freq_.omega()).norm() > 1e-12)
    throw ConfigError("HamiltonianSpec: grad_y H0(0,0) != omega");
  if (std::abs(gz2) > 1e-12)
    throw ConfigError("HamiltonianSpec: d_{z2} H0(0,0) != 0");
  if (std::abs(hz2z2 - 1.0) > 1e-12)
    throw ConfigError("HamiltonianSpec: d2_{z2} H0(0,0) != 1");
}

double HamiltonianSpec::h0_at_origin() const {
  double v = 0;
  for (const auto& t : h0_) {
    int ysum = 0;
    for (int a : t.ypow) ysum += a;
    if (ysum == 0 && t.z2pow == 0) v += t.coef;
  }
  return v;
}

Eigen::MatrixXd HamiltonianSpec::S0() const {
  const int d = n_ - 1;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (const auto& t : h0_) {
    if (t.z2pow != 0) continue;
    int ysum = 0;
    for (int a : t.ypow) ysum += a;
    if (ysum != 2) continue;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        std::vector<int> p = t.ypow;
        if (p[size_t(i)] == 0) continue;
        double c = t.coef * p[size_t(i)];
        p[size_t(i)] -= 1;
        if (p[size_t(j)] == 0) continue;
        c *= p[size_t(j)];
        S(i, j) += c;
      }
  }
  return S;
}

Eigen::VectorXd HamiltonianSpec::t0() const {
  const int d = n_ - 1;
  Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
  for (const auto& tm : h0_) {
    if (tm.z2pow != 1) continue;
    int ysum = 0;
    for (int a : tm.ypow) ysum += a;
    if (ysum != 1) continue;
    for (int i = 0; i < d; ++i)
      if (tm.ypow[size_t(i)] == 1) t[i] += tm.coef;
  }
  return t;
}

Eigen::MatrixXd HamiltonianSpec::K0() const {
  Eigen::VectorXd t = t0();
  return S0() - t * t.transpose();
}

double HamiltonianSpec::value(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              const Eigen::Vector2d& z) const {
  const int d = n_ - 1;
  double v = mod_m_ * z[0] + 0.5 * mod_M_ * z[0] * z[0];
  auto term_val = [&](const HamTerm& t, double scale) {
    double theta = 0;
    if (!t.xmode.empty())
      for (int i = 0; i < d; ++i) theta += t.xmode[size_t(i)] * x[i];
    theta += t.z1mode * z[0];
    double val = scale * t.coef * (t.is_sin ? std::sin(theta) : std::cos(theta));
    for (int i = 0; i < d; ++i)
      for (int r = 0; r < t.ypow[size_t(i)]; ++r) val *= y[i];
    for (int r = 0; r < t.z2pow; ++r) val *= z[1];
    return val;
  };
  for (const auto& t : h0_) v += term_val(t, 1.0);
  for (const auto& t : h1_) v += term_val(t, eps_);
  return v;
}

void HamiltonianSpec::gradients(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                const Eigen::Vector2d& z, Eigen::VectorXd& gx,
                                Eigen::VectorXd& gy, Eigen::Vector2d& gz) const {
  const int d = n_ - 1;
  gx = Eigen::VectorXd::Zero(d);
  gy = Eigen::VectorXd::Zero(d);
  gz = Eigen::Vector2d::Zero();
  gz[0] += mod_m_ + mod_M_ * z[0];
  auto accumulate = [&](const HamTerm& t, double scale) {
    double theta = 0;
    if (!t.xmode.empty())
      for (int i = 0; i < d; ++i) theta += t.xmode[size_t(i)] * x[i];
    theta += t.z1mode * z[0];
    double trig = t.is_sin ? std::sin(theta) : std::cos(theta);
    double dtrig = t.is_sin ? std::cos(theta) : -std::sin(theta);
    double poly = scale * t.coef;
    for (int i = 0; i < d; ++i)
      for (int r = 0; r < t.ypow[size_t(i)]; ++r) poly *= y[i];
    for (int r = 0; r < t.z2pow; ++r) poly *= z[1];
    if (!t.xmode.empty())
      for (int i = 0; i < d; ++i) gx[i] += poly * dtrig * t.xmode[size_t(i)];
    gz[0] += poly * dtrig * t.z1mode;
    for (int i = 0; i < d; ++i) {
      if (t.ypow[size_t(i)] == 0) continue;
      double v = scale * t.coef * t.ypow[size_t(i)] * trig;
      for (int j = 0; j < d; ++j) {
        int pw = t.ypow[size_t(j)] - (j == i ? 1 : 0);
        for (int r = 0; r < pw; ++r) v *= y[j];
      }
      for (int r = 0; r < t.z2pow; ++r) v *= z[1];
      gy[i] += v;
    }
    if (t.z2pow > 0) {
      double v = scale * t.coef * t.z2pow * trig;
      for (int i = 0; i < d; ++i)
        for (int r = 0; r < t.ypow[size_t(i)]; ++r) v *= y[i];
      for (int r = 0; r < t.z2pow - 1; ++r) v *= z[1];
      gz[1] += v;
    }
  };
  for (const auto& t : h0_) accumulate(t, 1.0);
  for (const auto& t : h1_) accumulate(t, eps_);
}

HamiltonianSpec modify(const HamiltonianSpec& H, double m, double M) {
  HamiltonianSpec Hm = H;
  Hm.mod_m_ = H.mod_m_ + m;
  Hm.mod_M_ = H.mod_M_ + M;
  return Hm;
}

Field eval_composed(const HamiltonianSpec& H, const DerivOrder& d,
                    const Embedding& emb, int grid) {
  const int K = emb.u[0].cutoff();
  int g = composition_grid(K, K, grid);
  EmbGrids eg = embed_grids(emb, g);
  return eval_with(H, d, eg, K);
}

HamDerivs eval_all(const HamiltonianSpec& H, const Embedding& emb, DerivDepth depth,
                   int grid) {
  const int d = H.dim();
  const int K = emb.u[0].cutoff();
  int g = composition_grid(K, K, grid);
  EmbGrids eg = embed_grids(emb, g);

  HamDerivs out;
  out.value = eval_with(H, DerivOrder{}, eg, K);
  if (depth == DerivDepth::Value) return out;

  out.grad_x = VField(d, d, K);
  out.grad_y = VField(d, d, K);
  out.grad_z = VField(2, d, K);
  for (int i = 0; i < d; ++i) {
    out.grad_x[i] = eval_with(H, DerivOrder{{i}, {}, 0, 0}, eg, K);
    out.grad_y[i] = eval_with(H, DerivOrder{{}, {i}, 0, 0}, eg, K);
  }
  out.grad_z[0] = eval_with(H, DerivOrder{{}, {}, 1, 0}, eg, K);
  out.grad_z[1] = eval_with(H, DerivOrder{{}, {}, 0, 1}, eg, K);
  if (depth == DerivDepth::First) return out;

  auto z_order = [](int p, int extra_z1, int extra_z2) {
    DerivOrder o;
    o.z1 = extra_z1 + (p == 0 ? 1 : 0);
    o.z2 = extra_z2 + (p == 1 ? 1 : 0);
    return o;
  };

  out.hess_yy = MField(d, d, d, K);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      Field f = eval_with(H, DerivOrder{{}, {i, j}, 0, 0}, eg, K);
      out.hess_yy(i, j) = f;
      if (i != j) out.hess_yy(j, i) = f;
    }
  out.hess_zy = MField(2, d, d, K);
  for (int p = 0; p < 2; ++p)
    for (int j = 0; j < d; ++j) {
      DerivOrder o = z_order(p, 0, 0);
      o.y = {j};
      out.hess_zy(p, j) = eval_with(H, o, eg, K);
    }
  out.hess_zz = MField(2, 2, d, K);
  for (int p = 0; p < 2; ++p)
    for (int q = p; q < 2; ++q) {
      DerivOrder o;
      o.z1 = (p == 0 ? 1 : 0) + (q == 0 ? 1 : 0);
      o.z2 = (p == 1 ? 1 : 0) + (q == 1 ? 1 : 0);
      Field f = eval_with(H, o, eg, K);
      out.hess_zz(p, q) = f;
      if (p != q) out.hess_zz(q, p) = f;
    }
  if (depth == DerivDepth::Second) return out;

  auto third_yy = [&](const DerivOrder& base) {
    MField m(d, d, d, K);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        DerivOrder o = base;
        o.y.push_back(i);
        o.y.push_back(j);
        Field f = eval_with(H, o, eg, K);
        m(i, j) = f;
        if (i != j) m(j, i) = f;
      }
    return m;
  };
  auto third_zy = [&](const DerivOrder& base) {
    MField m(2, d, d, K);
    for (int p = 0; p < 2; ++p)
      for (int j = 0; j < d; ++j) {
        DerivOrder o = base;
        o.y.push_back(j);
        o.z1 += (p == 0 ? 1 : 0);
        o.z2 += (p == 1 ? 1 : 0);
        m(p, j) = eval_with(H, o, eg, K);
      }
    return m;
  };
  auto third_zz = [&](const DerivOrder& base) {
    MField m(2, 2, d, K);
    for (int p = 0; p < 2; ++p)
      for (int q = p; q < 2; ++q) {
        DerivOrder o = base;
        o.z1 += (p == 0 ? 1 : 0) + (q == 0 ? 1 : 0);
        o.z2 += (p == 1 ? 1 : 0) + (q == 1 ? 1 : 0);
        Field f = eval_with(H, o, eg, K);
        m(p, q) = f;
        if (p != q) m(q, p) = f;
      }
    return m;
  };

  for (int a = 0; a < d; ++a) {
    DerivOrder base;
    base.y = {a};
    out.d3_y_yy.push_back(third_yy(base));
    out.d3_y_zy.push_back(third_zy(base));
    out.d3_y_zz.push_back(third_zz(base));
  }
  for (int p = 0; p < 2; ++p) {
    DerivOrder base;
    base.z1 = p == 0 ? 1 : 0;
    base.z2 = p == 1 ? 1 : 0;
    out.d3_z_yy.push_back(third_yy(base));
    out.d3_z_zy.push_back(third_zy(base));
    out.d3_z_zz.push_back(third_zz(base));
  }
  return out;
}

HamiltonianSpec HamiltonianSpec::from_toml_string(const std::string& text) {
  toml::Document doc = toml::parse(text);
  auto omega_arr = doc.root.array("omega");
  int n = int(omega_arr.size()) + 1;
  Eigen::VectorXd omega(n - 1);
  for (int i = 0; i < n - 1; ++i) omega[i] = omega_arr[size_t(i)];
  double gamma = doc.root.number("gamma");
  double tau = doc.root.number("tau");
  double eps = doc.root.number("epsilon");

  auto read_terms = [&](const std::string& key, bool allow_angles) {
    std::vector<HamTerm> terms;
    auto it = doc.table_arrays.find(key);
    if (it == doc.table_arrays.end()) return terms;
    for (const auto& tb : it->second) {
      HamTerm t;
      t.coef = tb.number("coef");
      t.ypow = tb.int_array("ypow");
      t.z2pow = int(tb.number_or("z2pow", 0));
      if (allow_angles) {
        if (tb.has("xmode")) t.xmode = tb.int_array("xmode");
        t.z1mode = int(tb.number_or("z1mode", 0));
        if (tb.has("phase")) {
          const std::string& ph = tb.string("phase");
          if (ph == "sin")
            t.is_sin = true;
          else if (ph == "cos")
            t.is_sin = false;
          else
            throw ConfigError("hamiltonian: phase must be \"cos\" or \"sin\"");
        }
        if (t.xmode.empty() && t.z1mode != 0) t.xmode.assign(size_t(n - 1), 0);
      }
      terms.push_back(std::move(t));
    }
    return terms;
  };

  std::vector<HamTerm> h0 = read_terms("h0", false);
  std::vector<HamTerm> h1 = read_terms("h1", true);
  return HamiltonianSpec(n, std::move(h0), std::move(h1), eps,
                         Freq(omega, gamma, tau));
}

HamiltonianSpec HamiltonianSpec::from_toml_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("hamiltonian: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return from_toml_string(ss.str());
}

}  // namespace torus
