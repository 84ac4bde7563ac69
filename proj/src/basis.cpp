#include "mtnls/basis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <ostream>

#include "mtnls/errors.hpp"

namespace mtnls {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe; execution via the new-array interface is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

int next_fast_size(int n) {
  for (int m = n;; ++m) {
    int r = m;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

// Per-thread scratch for new-array execution, keyed by grid size.
struct Scratch {
  int n = 0;
  fftw_complex* buf = nullptr;
  ~Scratch() {
    if (buf) fftw_free(buf);
  }
  fftw_complex* get(int grid_n) {
    if (n != grid_n) {
      if (buf) fftw_free(buf);
      buf = fftw_alloc_complex(static_cast<std::size_t>(grid_n) * grid_n);
      n = grid_n;
    }
    return buf;
  }
};

thread_local Scratch tls_scratch;

}  // namespace

struct SpectralBasis::FftPlans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* base = nullptr;  // planning array, also alignment reference
  ~FftPlans() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (base) fftw_free(base);
  }
};

SpectralField::SpectralField(BasisPtr b)
    : basis(std::move(b)), coeff(basis->mode_count(), Complex{0.0, 0.0}) {}

bool SpectralField::finite() const {
  for (const auto& c : coeff)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

GridField::GridField(BasisPtr b)
    : basis(std::move(b)), values(basis->grid_point_count(), Complex{0.0, 0.0}) {}

SpectralBasis::~SpectralBasis() = default;

BasisPtr make_basis(BasisKind kind, int K, int q) {
  const int min_K = (kind == BasisKind::TorusFourier) ? 0 : 1;
  if (K < min_K)
    throw ConfigError("make_basis: cutoff K must be >= " + std::to_string(min_K));
  if (q < 2) throw ConfigError("make_basis: oversample q must be >= 2");

  auto b = std::shared_ptr<SpectralBasis>(new SpectralBasis());
  b->kind_ = kind;
  b->cutoff_ = K;
  b->oversample_ = q;
  b->grid_n_ = next_fast_size(q * (2 * K + 1));
  const std::size_t ngrid = b->grid_point_count();
  const int N = b->grid_n_;

  if (kind == BasisKind::TorusFourier) {
    b->area_ = 4.0 * kPi * kPi;
    b->quad_weight_ = b->area_ / static_cast<double>(ngrid);
    for (int k1 = -K; k1 <= K; ++k1)
      for (int k2 = -K; k2 <= K; ++k2)
        b->modes_.push_back(
            {k1, k2, static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2});
  } else {
    b->area_ = kPi * kPi;
    // Odd-periodic extension lives on the [0,2pi)^2 torus grid; restricting
    // the quadrature to [0,pi]^2 divides the full-grid weight by 4.
    b->quad_weight_ = (4.0 * kPi * kPi / static_cast<double>(ngrid)) / 4.0;
    for (int k1 = 1; k1 <= K; ++k1)
      for (int k2 = 1; k2 <= K; ++k2)
        b->modes_.push_back(
            {k1, k2, static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2});
  }

  std::stable_sort(b->modes_.begin(), b->modes_.end(), [](const Mode& a, const Mode& c) {
    if (a.lambda != c.lambda) return a.lambda < c.lambda;
    if (a.k1 != c.k1) return a.k1 < c.k1;
    return a.k2 < c.k2;
  });

  auto bin_index = [N](int k1, int k2) -> std::size_t {
    const int i = ((k1 % N) + N) % N;
    const int j = ((k2 % N) + N) % N;
    return static_cast<std::size_t>(i) * N + j;
  };

  b->bin_map_.resize(b->modes_.size());
  const double ntot = static_cast<double>(ngrid);
  for (std::size_t n = 0; n < b->modes_.size(); ++n) {
    const Mode& m = b->modes_[n];
    if (kind == BasisKind::TorusFourier) {
      // e_k = exp(ik.x)/(2pi); c_k = (2pi/Ntot) * F(k).
      b->bin_map_[n].push_back({bin_index(m.k1, m.k2), Complex{1.0 / (2.0 * kPi), 0.0},
                                Complex{2.0 * kPi / ntot, 0.0}, m.k1, m.k2});
    } else {
      // sin a sin b = -(1/4) sum over signs s1 s2 of s1*s2*exp(i(s1 a + s2 b)).
      for (int s1 : {1, -1})
        for (int s2 : {1, -1}) {
          const double sign = static_cast<double>(s1 * s2);
          b->bin_map_[n].push_back({bin_index(s1 * m.k1, s2 * m.k2),
                                    Complex{(2.0 / kPi) * (-0.25) * sign, 0.0},
                                    Complex{-(kPi / (2.0 * ntot)) * sign, 0.0},
                                    s1 * m.k1, s2 * m.k2});
        }
    }
  }

  b->plans_ = std::make_unique<SpectralBasis::FftPlans>();
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    b->plans_->base = fftw_alloc_complex(ngrid);
    b->plans_->fwd = fftw_plan_dft_2d(N, N, b->plans_->base, b->plans_->base,
                                      FFTW_FORWARD, FFTW_ESTIMATE);
    b->plans_->bwd = fftw_plan_dft_2d(N, N, b->plans_->base, b->plans_->base,
                                      FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  return b;
}

BasisPtr with_oversample(const SpectralBasis& b, int q) {
  return make_basis(b.kind(), b.cutoff(), q);
}

BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "torus" || s == "torus-fourier") return BasisKind::TorusFourier;
  if (s == "square" || s == "dirichlet-sine") return BasisKind::DirichletSine;
  throw ConfigError("unknown basis kind: " + s);
}

std::string to_string(BasisKind kind) {
  return kind == BasisKind::TorusFourier ? "torus-fourier" : "dirichlet-sine";
}

void SpectralBasis::check_field(const SpectralField& u) const {
  if (u.basis.get() != this) throw UsageError("field does not belong to this basis");
  if (u.coeff.size() != mode_count())
    throw UsageError("coefficient vector length does not match mode table");
}

void SpectralBasis::check_field(const GridField& g) const {
  if (g.basis.get() != this) throw UsageError("grid field does not belong to this basis");
  if (g.values.size() != grid_point_count())
    throw UsageError("grid field shape does not match basis grid");
}

GridField SpectralBasis::to_grid(const SpectralField& u) const {
  check_field(u);
  fftw_complex* buf = tls_scratch.get(grid_n_);
  const std::size_t ngrid = grid_point_count();
  std::memset(buf, 0, sizeof(fftw_complex) * ngrid);
  for (std::size_t n = 0; n < modes_.size(); ++n)
    for (const auto& e : bin_map_[n]) {
      const Complex v = u.coeff[n] * e.scatter_w;
      buf[e.bin][0] += v.real();
      buf[e.bin][1] += v.imag();
    }
  fftw_execute_dft(plans_->bwd, buf, buf);
  GridField g(u.basis);
  std::memcpy(g.values.data(), buf, sizeof(fftw_complex) * ngrid);
  return g;
}

SpectralField SpectralBasis::to_spectral(const GridField& g) const {
  check_field(g);
  fftw_complex* buf = tls_scratch.get(grid_n_);
  const std::size_t ngrid = grid_point_count();
  std::memcpy(buf, g.values.data(), sizeof(fftw_complex) * ngrid);
  fftw_execute_dft(plans_->fwd, buf, buf);
  SpectralField u(g.basis);
  for (std::size_t n = 0; n < modes_.size(); ++n) {
    Complex c{0.0, 0.0};
    for (const auto& e : bin_map_[n])
      c += e.gather_w * Complex{buf[e.bin][0], buf[e.bin][1]};
    u.coeff[n] = c;
  }
  return u;
}

std::array<GridField, 2> SpectralBasis::gradient(const SpectralField& u) const {
  check_field(u);
  std::array<GridField, 2> out{GridField(u.basis), GridField(u.basis)};
  fftw_complex* buf = tls_scratch.get(grid_n_);
  const std::size_t ngrid = grid_point_count();
  for (int axis = 0; axis < 2; ++axis) {
    std::memset(buf, 0, sizeof(fftw_complex) * ngrid);
    for (std::size_t n = 0; n < modes_.size(); ++n)
      for (const auto& e : bin_map_[n]) {
        const double k = (axis == 0) ? e.kx1 : e.kx2;
        const Complex v = u.coeff[n] * e.scatter_w * Complex{0.0, k};
        buf[e.bin][0] += v.real();
        buf[e.bin][1] += v.imag();
      }
    fftw_execute_dft(plans_->bwd, buf, buf);
    std::memcpy(out[axis].values.data(), buf, sizeof(fftw_complex) * ngrid);
  }
  return out;
}

SpectralField apply_laplacian_power(const SpectralField& u, double s) {
  SpectralField out(u.basis);
  for (std::size_t n = 0; n < u.coeff.size(); ++n) {
    const double lam = u.basis->lambda(n);
    if (lam == 0.0)
      out.coeff[n] = (s == 0.0) ? u.coeff[n] : Complex{0.0, 0.0};
    else
      out.coeff[n] = u.coeff[n] * std::pow(lam, s);
  }
  return out;
}

SpectralField project(const SpectralField& u, int K_prime) {
  if (K_prime > u.basis->cutoff())
    throw UsageError("project: K' exceeds the basis cutoff");
  SpectralField out = u;
  const auto& modes = u.basis->modes();
  for (std::size_t n = 0; n < modes.size(); ++n)
    if (std::max(std::abs(modes[n].k1), std::abs(modes[n].k2)) > K_prime)
      out.coeff[n] = Complex{0.0, 0.0};
  return out;
}

double sobolev_norm(const SpectralField& u, double s) {
  double acc = 0.0;
  for (std::size_t n = 0; n < u.coeff.size(); ++n)
    acc += std::pow(1.0 + u.basis->lambda(n), s) * std::norm(u.coeff[n]);
  return std::sqrt(acc);
}

double homogeneous_seminorm(const SpectralField& u, double s) {
  double acc = 0.0;
  for (std::size_t n = 0; n < u.coeff.size(); ++n) {
    const double lam = u.basis->lambda(n);
    if (lam > 0.0)
      acc += std::pow(lam, s) * std::norm(u.coeff[n]);
    else if (s == 0.0)
      acc += std::norm(u.coeff[n]);
  }
  return std::sqrt(acc);
}

double lp_norm(const GridField& g, double p) {
  if (p < 1.0) throw UsageError("lp_norm: p must be >= 1");
  if (std::isinf(p)) return linf_norm(g);
  const double w = g.basis->quad_weight();
  double acc = 0.0;
  for (const auto& v : g.values) acc += std::pow(std::abs(v), p);
  return std::pow(w * acc, 1.0 / p);
}

double linf_norm(const GridField& g) {
  double m = 0.0;
  for (const auto& v : g.values) m = std::max(m, std::abs(v));
  return m;
}

double inner(const SpectralField& u, const SpectralField& v) {
  if (u.basis != v.basis) throw UsageError("inner: basis mismatch");
  double acc = 0.0;
  for (std::size_t n = 0; n < u.coeff.size(); ++n)
    acc += u.coeff[n].real() * v.coeff[n].real() + u.coeff[n].imag() * v.coeff[n].imag();
  return acc;
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  if (a.basis != b.basis) throw UsageError("field addition: basis mismatch");
  SpectralField out = a;
  for (std::size_t n = 0; n < out.coeff.size(); ++n) out.coeff[n] += b.coeff[n];
  return out;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  if (a.basis != b.basis) throw UsageError("field subtraction: basis mismatch");
  SpectralField out = a;
  for (std::size_t n = 0; n < out.coeff.size(); ++n) out.coeff[n] -= b.coeff[n];
  return out;
}

SpectralField operator*(Complex s, const SpectralField& a) {
  SpectralField out = a;
  for (auto& c : out.coeff) c *= s;
  return out;
}

SpectralField operator*(double s, const SpectralField& a) {
  return Complex{s, 0.0} * a;
}

void axpy(Complex s, const SpectralField& x, SpectralField& y) {
  if (x.basis != y.basis) throw UsageError("axpy: basis mismatch");
  for (std::size_t n = 0; n < y.coeff.size(); ++n) y.coeff[n] += s * x.coeff[n];
}

namespace {
constexpr char kMagic[6] = {'M', 'T', 'N', 'L', 'S', '1'};
}

void save_snapshot(const SpectralField& u, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open snapshot file for writing: " + path);
  os.write(kMagic, 6);
  const std::uint8_t kind = (u.basis->kind() == BasisKind::TorusFourier) ? 0 : 1;
  os.write(reinterpret_cast<const char*>(&kind), 1);
  const std::int32_t K = u.basis->cutoff(), q = u.basis->oversample();
  os.write(reinterpret_cast<const char*>(&K), 4);
  os.write(reinterpret_cast<const char*>(&q), 4);
  const std::int64_t count = static_cast<std::int64_t>(u.coeff.size());
  os.write(reinterpret_cast<const char*>(&count), 8);
  for (const auto& c : u.coeff) {
    const double re = c.real(), im = c.imag();
    os.write(reinterpret_cast<const char*>(&re), 8);
    os.write(reinterpret_cast<const char*>(&im), 8);
  }
}

SpectralField load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open snapshot file: " + path);
  char magic[6];
  is.read(magic, 6);
  if (!is || std::memcmp(magic, kMagic, 6) != 0)
    throw UsageError("bad snapshot magic in " + path);
  std::uint8_t kind = 0;
  std::int32_t K = 0, q = 0;
  std::int64_t count = 0;
  is.read(reinterpret_cast<char*>(&kind), 1);
  is.read(reinterpret_cast<char*>(&K), 4);
  is.read(reinterpret_cast<char*>(&q), 4);
  is.read(reinterpret_cast<char*>(&count), 8);
  auto basis =
      make_basis(kind == 0 ? BasisKind::TorusFourier : BasisKind::DirichletSine, K, q);
  if (count != static_cast<std::int64_t>(basis->mode_count()))
    throw UsageError("snapshot mode count does not match basis");
  SpectralField u(basis);
  for (auto& c : u.coeff) {
    double re = 0, im = 0;
    is.read(reinterpret_cast<char*>(&re), 8);
    is.read(reinterpret_cast<char*>(&im), 8);
    c = Complex{re, im};
  }
  if (!is) throw UsageError("truncated snapshot: " + path);
  return u;
}

void export_csv(const SpectralField& u, std::ostream& os) {
  os << "n,k1,k2,lambda,re,im\n";
  const auto& modes = u.basis->modes();
  char line[160];
  for (std::size_t n = 0; n < modes.size(); ++n) {
    std::snprintf(line, sizeof(line), "%zu,%d,%d,%.17g,%.17g,%.17g\n", n, modes[n].k1,
                  modes[n].k2, modes[n].lambda, u.coeff[n].real(), u.coeff[n].imag());
    os << line;
  }
}

}  // namespace mtnls
