#include "mpsmesh/predicates.hpp"

#include <cmath>
#include <vector>

namespace mpsmesh::predicates {
namespace {

constexpr double kEps = 0x1p-53;
constexpr double kCcwErrA = (3.0 + 16.0 * kEps) * kEps;
constexpr double kO3dErrA = (7.0 + 56.0 * kEps) * kEps;
constexpr double kIccErrA = (10.0 + 96.0 * kEps) * kEps;
constexpr double kIspErrA = (16.0 + 224.0 * kEps) * kEps;

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Nonoverlapping floating-point expansion, components ordered by increasing
// magnitude, zero components eliminated (the zero expansion is empty).
class Expansion {
 public:
  Expansion() = default;
  explicit Expansion(double v) {
    if (v != 0.0) c_.push_back(v);
  }

  static Expansion diff(double a, double b) {
    const double x = a - b;
    const double bvirt = a - x;
    const double avirt = x + bvirt;
    const double bround = bvirt - b;
    const double around = a - avirt;
    const double y = around + bround;
    Expansion e;
    if (y != 0.0) e.c_.push_back(y);
    if (x != 0.0) e.c_.push_back(x);
    return e;
  }

  int sign() const { return c_.empty() ? 0 : sign_of(c_.back()); }

  friend Expansion operator+(const Expansion& e, const Expansion& f) {
    if (e.c_.size() < f.c_.size()) return f + e;
    Expansion h = e;
    for (double b : f.c_) h.grow(b);
    return h;
  }

  friend Expansion operator-(const Expansion& e, const Expansion& f) {
    Expansion nf = f;
    for (double& v : nf.c_) v = -v;
    return e + nf;
  }

  friend Expansion operator*(const Expansion& e, const Expansion& f) {
    Expansion h;
    for (double b : f.c_) h = h + e.scaled(b);
    return h;
  }

 private:
  static void two_sum(double a, double b, double& x, double& y) {
    x = a + b;
    const double bvirt = x - a;
    const double avirt = x - bvirt;
    const double bround = b - bvirt;
    const double around = a - avirt;
    y = around + bround;
  }

  static void fast_two_sum(double a, double b, double& x, double& y) {
    x = a + b;
    const double bvirt = x - a;
    y = b - bvirt;
  }

  static void two_product(double a, double b, double& x, double& y) {
    x = a * b;
    y = std::fma(a, b, -x);
  }

  void grow(double b) {
    std::vector<double> h;
    h.reserve(c_.size() + 1);
    double q = b;
    for (double e : c_) {
      double qnew, hh;
      two_sum(q, e, qnew, hh);
      q = qnew;
      if (hh != 0.0) h.push_back(hh);
    }
    if (q != 0.0) h.push_back(q);
    c_ = std::move(h);
  }

  Expansion scaled(double b) const {
    Expansion h;
    if (c_.empty() || b == 0.0) return h;
    h.c_.reserve(2 * c_.size());
    double q, hh;
    two_product(c_[0], b, q, hh);
    if (hh != 0.0) h.c_.push_back(hh);
    for (std::size_t i = 1; i < c_.size(); ++i) {
      double p1, p0, sum;
      two_product(c_[i], b, p1, p0);
      two_sum(q, p0, sum, hh);
      if (hh != 0.0) h.c_.push_back(hh);
      fast_two_sum(p1, sum, q, hh);
      if (hh != 0.0) h.c_.push_back(hh);
    }
    if (q != 0.0) h.c_.push_back(q);
    return h;
  }

  std::vector<double> c_;
};

int orient2d_exact(const Point2& a, const Point2& b, const Point2& c) {
  const auto acx = Expansion::diff(a[0], c[0]);
  const auto acy = Expansion::diff(a[1], c[1]);
  const auto bcx = Expansion::diff(b[0], c[0]);
  const auto bcy = Expansion::diff(b[1], c[1]);
  return (acx * bcy - acy * bcx).sign();
}

int incircle_exact(const Point2& a, const Point2& b, const Point2& c,
                   const Point2& d) {
  const auto adx = Expansion::diff(a[0], d[0]);
  const auto ady = Expansion::diff(a[1], d[1]);
  const auto bdx = Expansion::diff(b[0], d[0]);
  const auto bdy = Expansion::diff(b[1], d[1]);
  const auto cdx = Expansion::diff(c[0], d[0]);
  const auto cdy = Expansion::diff(c[1], d[1]);
  const auto bc = bdx * cdy - cdx * bdy;
  const auto ca = cdx * ady - adx * cdy;
  const auto ab = adx * bdy - bdx * ady;
  const auto alift = adx * adx + ady * ady;
  const auto blift = bdx * bdx + bdy * bdy;
  const auto clift = cdx * cdx + cdy * cdy;
  return (alift * bc + blift * ca + clift * ab).sign();
}

int orient3d_exact(const Point3& a, const Point3& b, const Point3& c,
                   const Point3& d) {
  const Expansion u[3] = {Expansion::diff(b[0], a[0]),
                          Expansion::diff(b[1], a[1]),
                          Expansion::diff(b[2], a[2])};
  const Expansion v[3] = {Expansion::diff(c[0], a[0]),
                          Expansion::diff(c[1], a[1]),
                          Expansion::diff(c[2], a[2])};
  const Expansion w[3] = {Expansion::diff(d[0], a[0]),
                          Expansion::diff(d[1], a[1]),
                          Expansion::diff(d[2], a[2])};
  const auto m0 = v[1] * w[2] - v[2] * w[1];
  const auto m1 = v[0] * w[2] - v[2] * w[0];
  const auto m2 = v[0] * w[1] - v[1] * w[0];
  return (u[0] * m0 - u[1] * m1 + u[2] * m2).sign();
}

// Sign of the classic lifted determinant (positive = inside for negatively
// oriented a,b,c,d in our orient3d convention).
int insphere_raw_exact(const Point3& a, const Point3& b, const Point3& c,
                       const Point3& d, const Point3& e) {
  const auto aex = Expansion::diff(a[0], e[0]);
  const auto aey = Expansion::diff(a[1], e[1]);
  const auto aez = Expansion::diff(a[2], e[2]);
  const auto bex = Expansion::diff(b[0], e[0]);
  const auto bey = Expansion::diff(b[1], e[1]);
  const auto bez = Expansion::diff(b[2], e[2]);
  const auto cex = Expansion::diff(c[0], e[0]);
  const auto cey = Expansion::diff(c[1], e[1]);
  const auto cez = Expansion::diff(c[2], e[2]);
  const auto dex = Expansion::diff(d[0], e[0]);
  const auto dey = Expansion::diff(d[1], e[1]);
  const auto dez = Expansion::diff(d[2], e[2]);

  const auto ab = aex * bey - bex * aey;
  const auto bc = bex * cey - cex * bey;
  const auto cd = cex * dey - dex * cey;
  const auto da = dex * aey - aex * dey;
  const auto ac = aex * cey - cex * aey;
  const auto bd = bex * dey - dex * bey;

  const auto abc = aez * bc - bez * ac + cez * ab;
  const auto bcd = bez * cd - cez * bd + dez * bc;
  const auto cda = cez * da + dez * ac + aez * cd;
  const auto dab = dez * ab + aez * bd + bez * da;

  const auto alift = aex * aex + aey * aey + aez * aez;
  const auto blift = bex * bex + bey * bey + bez * bez;
  const auto clift = cex * cex + cey * cey + cez * cez;
  const auto dlift = dex * dex + dey * dey + dez * dez;

  return ((dlift * abc - clift * dab) + (blift * cda - alift * bcd)).sign();
}

}  // namespace

Stats& thread_stats() {
  thread_local Stats stats;
  return stats;
}

int orient2d(const Point2& a, const Point2& b, const Point2& c) {
  const double detleft = (a[0] - c[0]) * (b[1] - c[1]);
  const double detright = (a[1] - c[1]) * (b[0] - c[0]);
  const double det = detleft - detright;
  const double errbound = kCcwErrA * (std::fabs(detleft) + std::fabs(detright));
  if (det > errbound || -det > errbound) {
    ++thread_stats().filtered;
    return sign_of(det);
  }
  ++thread_stats().exact;
  return orient2d_exact(a, b, c);
}

int incircle(const Point2& a, const Point2& b, const Point2& c,
             const Point2& d) {
  const double adx = a[0] - d[0], ady = a[1] - d[1];
  const double bdx = b[0] - d[0], bdy = b[1] - d[1];
  const double cdx = c[0] - d[0], cdy = c[1] - d[1];

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double alift = adx * adx + ady * ady;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double blift = bdx * bdx + bdy * bdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double clift = cdx * cdx + cdy * cdy;

  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                     clift * (adxbdy - bdxady);
  const double permanent =
      (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * alift +
      (std::fabs(cdxady) + std::fabs(adxcdy)) * blift +
      (std::fabs(adxbdy) + std::fabs(bdxady)) * clift;
  const double errbound = kIccErrA * permanent;
  if (det > errbound || -det > errbound) {
    ++thread_stats().filtered;
    return sign_of(det);
  }
  ++thread_stats().exact;
  return incircle_exact(a, b, c, d);
}

int orient3d(const Point3& a, const Point3& b, const Point3& c,
             const Point3& d) {
  const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
  const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
  const double wx = d[0] - a[0], wy = d[1] - a[1], wz = d[2] - a[2];

  const double vywz = vy * wz, vzwy = vz * wy;
  const double vxwz = vx * wz, vzwx = vz * wx;
  const double vxwy = vx * wy, vywx = vy * wx;

  const double det =
      ux * (vywz - vzwy) - uy * (vxwz - vzwx) + uz * (vxwy - vywx);
  const double permanent =
      std::fabs(ux) * (std::fabs(vywz) + std::fabs(vzwy)) +
      std::fabs(uy) * (std::fabs(vxwz) + std::fabs(vzwx)) +
      std::fabs(uz) * (std::fabs(vxwy) + std::fabs(vywx));
  const double errbound = kO3dErrA * permanent;
  if (det > errbound || -det > errbound) {
    ++thread_stats().filtered;
    return sign_of(det);
  }
  ++thread_stats().exact;
  return orient3d_exact(a, b, c, d);
}

int insphere(const Point3& a, const Point3& b, const Point3& c,
             const Point3& d, const Point3& e) {
  const double aex = a[0] - e[0], aey = a[1] - e[1], aez = a[2] - e[2];
  const double bex = b[0] - e[0], bey = b[1] - e[1], bez = b[2] - e[2];
  const double cex = c[0] - e[0], cey = c[1] - e[1], cez = c[2] - e[2];
  const double dex = d[0] - e[0], dey = d[1] - e[1], dez = d[2] - e[2];

  const double aexbey = aex * bey, bexaey = bex * aey;
  const double bexcey = bex * cey, cexbey = cex * bey;
  const double cexdey = cex * dey, dexcey = dex * cey;
  const double dexaey = dex * aey, aexdey = aex * dey;
  const double aexcey = aex * cey, cexaey = cex * aey;
  const double bexdey = bex * dey, dexbey = dex * bey;

  const double ab = aexbey - bexaey;
  const double bc = bexcey - cexbey;
  const double cd = cexdey - dexcey;
  const double da = dexaey - aexdey;
  const double ac = aexcey - cexaey;
  const double bd = bexdey - dexbey;

  const double abc = aez * bc - bez * ac + cez * ab;
  const double bcd = bez * cd - cez * bd + dez * bc;
  const double cda = cez * da + dez * ac + aez * cd;
  const double dab = dez * ab + aez * bd + bez * da;

  const double alift = aex * aex + aey * aey + aez * aez;
  const double blift = bex * bex + bey * bey + bez * bez;
  const double clift = cex * cex + cey * cey + cez * cez;
  const double dlift = dex * dex + dey * dey + dez * dez;

  const double det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);

  const double aezp = std::fabs(aez), bezp = std::fabs(bez);
  const double cezp = std::fabs(cez), dezp = std::fabs(dez);
  const double aexbeyp = std::fabs(aexbey), bexaeyp = std::fabs(bexaey);
  const double bexceyp = std::fabs(bexcey), cexbeyp = std::fabs(cexbey);
  const double cexdeyp = std::fabs(cexdey), dexceyp = std::fabs(dexcey);
  const double dexaeyp = std::fabs(dexaey), aexdeyp = std::fabs(aexdey);
  const double aexceyp = std::fabs(aexcey), cexaeyp = std::fabs(cexaey);
  const double bexdeyp = std::fabs(bexdey), dexbeyp = std::fabs(dexbey);
  const double permanent =
      ((cexdeyp + dexceyp) * bezp + (dexbeyp + bexdeyp) * cezp +
       (bexceyp + cexbeyp) * dezp) * alift +
      ((dexaeyp + aexdeyp) * cezp + (aexceyp + cexaeyp) * dezp +
       (cexdeyp + dexceyp) * aezp) * blift +
      ((aexbeyp + bexaeyp) * dezp + (bexdeyp + dexbeyp) * aezp +
       (dexaeyp + aexdeyp) * bezp) * clift +
      ((bexceyp + cexbeyp) * aezp + (cexaeyp + aexceyp) * bezp +
       (aexbeyp + bexaeyp) * cezp) * dlift;
  const double errbound = kIspErrA * permanent;
  if (det > errbound || -det > errbound) {
    ++thread_stats().filtered;
    return -sign_of(det);
  }
  ++thread_stats().exact;
  return -insphere_raw_exact(a, b, c, d, e);
}

int incircle3d_coplanar(const Point3& a, const Point3& b, const Point3& c,
                        const Point3& p) {
  // The sphere through a, b, c and any point off their plane cuts the plane
  // in the circumcircle of abc, so the sphere test decides the circle test.
  const Point3 n = cross(b - a, c - a);
  const double nn = norm(n);
  if (nn == 0.0) return -1;
  double scale = std::sqrt(std::fmax(norm2(b - a), norm2(c - a))) / nn;
  for (int attempt = 0; attempt < 8; ++attempt, scale *= 16.0) {
    const Point3 o = a + n * scale;
    const int s = orient3d(a, b, c, o);
    if (s != 0) return s * insphere(a, b, c, o, p);
  }
  return -1;
}

}  // namespace mpsmesh::predicates
