#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace mtnls {

using Complex = std::complex<double>;

enum class BasisKind { TorusFourier, DirichletSine };

struct Mode {
  int k1 = 0;
  int k2 = 0;
  double lambda = 0.0;
};

class SpectralBasis;
using BasisPtr = std::shared_ptr<const SpectralBasis>;

struct SpectralField {
  BasisPtr basis;
  std::vector<Complex> coeff;

  SpectralField() = default;
  explicit SpectralField(BasisPtr b);
  bool finite() const;
};

struct GridField {
  BasisPtr basis;
  std::vector<Complex> values;  // row-major, grid_size() x grid_size()

  GridField() = default;
  explicit GridField(BasisPtr b);
};

// Eigenbasis of -Delta on the flat torus [0,2pi)^2 (modes max|k_i| <= K,
// e_k = exp(ik.x)/2pi) or on the Dirichlet square [0,pi]^2
// (1 <= k_i <= K, e_k = (2/pi) sin(k1 x1) sin(k2 x2)). Modes are sorted by
// eigenvalue, ties broken lexicographically in (k1,k2). Immutable after
// construction; transforms are safe to call concurrently on distinct fields.
class SpectralBasis : public std::enable_shared_from_this<SpectralBasis> {
 public:
  ~SpectralBasis();
  SpectralBasis(const SpectralBasis&) = delete;
  SpectralBasis& operator=(const SpectralBasis&) = delete;

  BasisKind kind() const { return kind_; }
  int cutoff() const { return cutoff_; }
  int oversample() const { return oversample_; }
  std::size_t mode_count() const { return modes_.size(); }
  const std::vector<Mode>& modes() const { return modes_; }
  double lambda(std::size_t n) const { return modes_[n].lambda; }
  double area() const { return area_; }

  // Points per axis of the quadrature grid. For the Dirichlet square this is
  // the grid of the odd-periodic extension; quadrature weights already
  // account for the restriction to [0,pi]^2.
  int grid_size() const { return grid_n_; }
  std::size_t grid_point_count() const {
    return static_cast<std::size_t>(grid_n_) * grid_n_;
  }
  double quad_weight() const { return quad_weight_; }

  GridField to_grid(const SpectralField& u) const;
  SpectralField to_spectral(const GridField& g) const;
  // Spectral gradient evaluated on the grid: {du/dx1, du/dx2}.
  std::array<GridField, 2> gradient(const SpectralField& u) const;

 private:
  friend BasisPtr make_basis(BasisKind, int, int);
  SpectralBasis() = default;

  BasisKind kind_ = BasisKind::TorusFourier;
  int cutoff_ = 1;
  int oversample_ = 2;
  int grid_n_ = 0;
  double area_ = 0.0;
  double quad_weight_ = 0.0;
  std::vector<Mode> modes_;

  struct BinEntry {
    std::size_t bin;
    Complex scatter_w;
    Complex gather_w;
    int kx1, kx2;  // signed wavenumber carried by the bin
  };
  std::vector<std::vector<BinEntry>> bin_map_;  // per mode

  struct FftPlans;
  std::unique_ptr<FftPlans> plans_;

  void check_field(const SpectralField& u) const;
  void check_field(const GridField& g) const;
};

BasisPtr make_basis(BasisKind kind, int K, int q = 2);
BasisKind basis_kind_from_string(const std::string& s);
std::string to_string(BasisKind kind);

// Same kind and cutoff, different oversampling; mode tables coincide.
BasisPtr with_oversample(const SpectralBasis& b, int q);

// Diagonal operators and norms ------------------------------------------------

// (-Delta)^s; for s < 0 the zero mode (torus only) is annihilated.
SpectralField apply_laplacian_power(const SpectralField& u, double s);
SpectralField project(const SpectralField& u, int K_prime);

double sobolev_norm(const SpectralField& u, double s);
double homogeneous_seminorm(const SpectralField& u, double s);
double lp_norm(const GridField& g, double p);
double linf_norm(const GridField& g);

// Real L2 inner product Re sum u_n conj(v_n).
double inner(const SpectralField& u, const SpectralField& v);

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(Complex s, const SpectralField& a);
SpectralField operator*(double s, const SpectralField& a);
void axpy(Complex s, const SpectralField& x, SpectralField& y);  // y += s*x

// Snapshot format: little-endian, magic "MTNLS1", kind byte, K and q as
// int32, mode count as int64, then interleaved (re, im) doubles in
// mode-table order.
void save_snapshot(const SpectralField& u, const std::string& path);
SpectralField load_snapshot(const std::string& path);
void export_csv(const SpectralField& u, std::ostream& os);

}  // namespace mtnls
