#pragma once
// Small fixed-size linear algebra for 3D map analysis. Everything here is
// deliberately hand-rolled: the dimension is always 3 and the chart kernel
// needs these operations inlined and bit-reproducible.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace dlorenz {

using State = std::array<double, 3>;
using Complex = std::complex<double>;

inline State operator+(const State& a, const State& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline State operator-(const State& a, const State& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline State operator*(double c, const State& a) {
  return {c * a[0], c * a[1], c * a[2]};
}
inline double dot(const State& a, const State& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline State cross(const State& a, const State& b) {
  return {a[1] * b[2] - a[2] * b[1],
          a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const State& a) { return std::sqrt(dot(a, a)); }
inline double norm_inf(const State& a) {
  return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])});
}
inline State normalized(const State& a) {
  double n = norm(a);
  if (n == 0.0) throw std::domain_error("cannot normalize zero vector");
  return (1.0 / n) * a;
}
inline bool finite(const State& a) {
  return std::isfinite(a[0]) && std::isfinite(a[1]) && std::isfinite(a[2]);
}

// Distance from q to the closed segment [a, b].
inline double point_segment_distance(const State& q, const State& a, const State& b) {
  State ab = b - a;
  double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(q - a);
  double t = dot(q - a, ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return norm(q - (a + t * ab));
}

// Angle between lines spanned by unit vectors (orientation ignored), in [0, pi/2].
inline double line_angle(const State& u, const State& v) {
  double c = std::abs(dot(u, v));
  return std::acos(c > 1.0 ? 1.0 : c);
}
// Angle between directed unit vectors, in [0, pi].
inline double vector_angle(const State& u, const State& v) {
  double c = dot(u, v);
  return std::acos(c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c));
}

struct Mat3 {
  // Row-major.
  std::array<double, 9> a{};

  double& operator()(int i, int j) { return a[3 * i + j]; }
  double operator()(int i, int j) const { return a[3 * i + j]; }

  static Mat3 identity() {
    Mat3 m;
    m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return m;
  }
  static Mat3 from_rows(const State& r0, const State& r1, const State& r2) {
    Mat3 m;
    m.a = {r0[0], r0[1], r0[2], r1[0], r1[1], r1[2], r2[0], r2[1], r2[2]};
    return m;
  }
  static Mat3 from_cols(const State& c0, const State& c1, const State& c2) {
    Mat3 m;
    m.a = {c0[0], c1[0], c2[0], c0[1], c1[1], c2[1], c0[2], c1[2], c2[2]};
    return m;
  }
  State row(int i) const { return {a[3 * i], a[3 * i + 1], a[3 * i + 2]}; }
  State col(int j) const { return {a[j], a[3 + j], a[6 + j]}; }

  double trace() const { return a[0] + a[4] + a[8]; }
  double det() const {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) -
           a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }
  // Sum of principal 2x2 minors (second invariant).
  double minor_sum() const {
    return (a[0] * a[4] - a[1] * a[3]) +
           (a[0] * a[8] - a[2] * a[6]) +
           (a[4] * a[8] - a[5] * a[7]);
  }
  Mat3 transposed() const {
    return from_rows(col(0), col(1), col(2));
  }
};

inline State operator*(const Mat3& m, const State& v) {
  return {m.a[0] * v[0] + m.a[1] * v[1] + m.a[2] * v[2],
          m.a[3] * v[0] + m.a[4] * v[1] + m.a[5] * v[2],
          m.a[6] * v[0] + m.a[7] * v[1] + m.a[8] * v[2]};
}
inline Mat3 operator*(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j) + x(i, 2) * y(2, j);
  return r;
}
inline Mat3 operator-(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] - y.a[i];
  return r;
}
inline Mat3 operator+(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] + y.a[i];
  return r;
}

// Gaussian elimination with partial pivoting. Throws on (numerically) singular input.
inline State solve3(Mat3 m, State b) {
  int perm[3] = {0, 1, 2};
  for (int k = 0; k < 2; ++k) {
    int p = k;
    for (int i = k + 1; i < 3; ++i)
      if (std::abs(m(perm[i], k)) > std::abs(m(perm[p], k))) p = i;
    std::swap(perm[k], perm[p]);
    double piv = m(perm[k], k);
    if (piv == 0.0) throw std::domain_error("singular 3x3 system");
    for (int i = k + 1; i < 3; ++i) {
      double f = m(perm[i], k) / piv;
      for (int j = k; j < 3; ++j) m(perm[i], j) -= f * m(perm[k], j);
      b[perm[i]] -= f * b[perm[k]];
    }
  }
  if (m(perm[2], 2) == 0.0) throw std::domain_error("singular 3x3 system");
  State x;
  x[2] = b[perm[2]] / m(perm[2], 2);
  x[1] = (b[perm[1]] - m(perm[1], 2) * x[2]) / m(perm[1], 1);
  x[0] = (b[perm[0]] - m(perm[0], 1) * x[1] - m(perm[0], 2) * x[2]) / m(perm[0], 0);
  return x;
}

// Modified Gram-Schmidt QR of the column frame. R's diagonal is made positive
// (column sign flips), which is what the exponent accumulation needs.
struct QrDiag {
  Mat3 q;
  std::array<double, 3> rdiag;
};
inline QrDiag qr_positive(const Mat3& m) {
  State c0 = m.col(0), c1 = m.col(1), c2 = m.col(2);
  double r00 = norm(c0);
  if (r00 == 0.0) throw std::domain_error("rank-deficient frame in QR");
  c0 = (1.0 / r00) * c0;
  c1 = c1 - dot(c0, c1) * c0;
  double r11 = norm(c1);
  if (r11 == 0.0) throw std::domain_error("rank-deficient frame in QR");
  c1 = (1.0 / r11) * c1;
  c2 = c2 - dot(c0, c2) * c0;
  c2 = c2 - dot(c1, c2) * c1;
  double r22 = norm(c2);
  if (r22 == 0.0) throw std::domain_error("rank-deficient frame in QR");
  c2 = (1.0 / r22) * c2;
  return {Mat3::from_cols(c0, c1, c2), {r00, r11, r22}};
}

// Characteristic polynomial of a 3x3 matrix as monic l^3 + a*l^2 + b*l + c.
struct CharCoeffs {
  double a, b, c;
};
inline CharCoeffs char_coeffs(const Mat3& m) {
  return {-m.trace(), m.minor_sum(), -m.det()};
}

// Roots of the monic cubic l^3 + a*l^2 + b*l + c, closed form (trigonometric
// branch for three real roots, stable Cardano branch otherwise) followed by
// one Newton polish per root on the original cubic. Complex roots come out as
// an exact conjugate pair.
inline std::array<Complex, 3> solve_monic_cubic(double a, double b, double c) {
  const double third = 1.0 / 3.0;
  double shift = a * third;
  double p = b - a * a * third;
  double q = c + a * third * (2.0 * a * a / 9.0 - b);

  std::array<Complex, 3> roots;
  double disc = 0.25 * q * q + p * p * p / 27.0;
  if (p == 0.0 && q == 0.0) {
    roots = {Complex(-shift), Complex(-shift), Complex(-shift)};
  } else if (disc >= 0.0) {
    // One real root; avoid cancellation by taking the larger-magnitude cube root.
    double s = std::sqrt(disc);
    double w = -0.5 * q - std::copysign(s, q);
    double u, v;
    if (w == 0.0) {
      u = std::cbrt(-0.5 * q + s);
      v = std::cbrt(-0.5 * q - s);
    } else {
      u = std::cbrt(w);
      v = -p / (3.0 * u);
    }
    double t1 = u + v;
    double re = -0.5 * t1 - shift;
    double im = 0.5 * std::sqrt(3.0) * std::abs(u - v);
    roots = {Complex(t1 - shift), Complex(re, im), Complex(re, -im)};
  } else {
    // Three real roots.
    double r = 2.0 * std::sqrt(-p * third);
    double arg = 3.0 * q / (p * r);
    arg = arg > 1.0 ? 1.0 : (arg < -1.0 ? -1.0 : arg);
    double phi = std::acos(arg) * third;
    const double tau = 2.0943951023931953;  // 2*pi/3
    for (int k = 0; k < 3; ++k)
      roots[k] = Complex(r * std::cos(phi - tau * k) - shift);
  }

  auto poly = [&](Complex z) { return ((z + a) * z + b) * z + c; };
  auto dpoly = [&](Complex z) { return (3.0 * z + 2.0 * a) * z + b; };
  for (auto& z : roots) {
    Complex d = dpoly(z);
    if (std::abs(d) > 1e-8) {
      Complex zn = z - poly(z) / d;
      if (std::abs(poly(zn)) <= std::abs(poly(z))) z = zn;
    }
    if (z.imag() == 0.0) z = Complex(z.real());  // keep real roots exactly real
  }
  // Re-pair complex entries into an exact conjugate pair after polishing.
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (roots[i].imag() != 0.0 && roots[j].imag() != 0.0) {
        double re = 0.5 * (roots[i].real() + roots[j].real());
        double im = 0.5 * (std::abs(roots[i].imag()) + std::abs(roots[j].imag()));
        roots[i] = Complex(re, im);
        roots[j] = Complex(re, -im);
      }
  return roots;
}

// Stable real quadratic roots for x^2 + p*x + q = 0; empty when complex.
inline int solve_monic_quadratic(double p, double q, double out[2]) {
  double disc = p * p - 4.0 * q;
  if (disc < 0.0) return 0;
  if (disc == 0.0) {
    out[0] = -0.5 * p;
    return 1;
  }
  double s = std::sqrt(disc);
  double w = -0.5 * (p + std::copysign(s, p));
  if (w == 0.0) {  // p == 0
    out[0] = -0.5 * s;
    out[1] = 0.5 * s;
    return 2;
  }
  double r0 = w, r1 = q / w;
  out[0] = std::min(r0, r1);
  out[1] = std::max(r0, r1);
  return 2;
}

// Eigenvector of a real eigenvalue via the cross product of two rows of
// (M - lambda*I); picks the best-conditioned row pair.
inline State real_eigenvector(const Mat3& m, double lambda) {
  Mat3 s = m;
  s(0, 0) -= lambda;
  s(1, 1) -= lambda;
  s(2, 2) -= lambda;
  State c01 = cross(s.row(0), s.row(1));
  State c02 = cross(s.row(0), s.row(2));
  State c12 = cross(s.row(1), s.row(2));
  double n01 = norm(c01), n02 = norm(c02), n12 = norm(c12);
  State best = c01;
  double nb = n01;
  if (n02 > nb) { best = c02; nb = n02; }
  if (n12 > nb) { best = c12; nb = n12; }
  if (nb == 0.0) throw std::domain_error("degenerate eigenvector (repeated eigenvalue?)");
  return (1.0 / nb) * best;
}

}  // namespace dlorenz
