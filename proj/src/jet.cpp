#include "finsler/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace finsler {

namespace {

int degree(const MultiIndex& m) {
  int d = 0;
  for (auto e : m) d += e;
  return d;
}

double factorial_weight(const MultiIndex& m) {
  double w = 1.0;
  for (auto e : m)
    for (int k = 2; k <= e; ++k) w *= k;
  return w;
}

// All multi-indices of total degree <= order in n variables, sorted by degree
// then lexicographically, so index 0 is the zero multi-index.
struct BlockLayout {
  int n = 0;
  int order = 0;
  std::vector<MultiIndex> idx;
  std::map<MultiIndex, int> pos;
  // (i, j, k) with idx[i] + idx[j] == idx[k].
  std::vector<std::array<int, 3>> products;
};

void enumerate(int n, int order, int var, MultiIndex& cur, int used,
               std::vector<MultiIndex>& out) {
  if (var == n) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e + used <= order; ++e) {
    cur[var] = static_cast<std::uint8_t>(e);
    enumerate(n, order, var + 1, cur, used + e, out);
  }
  cur[var] = 0;
}

std::shared_ptr<const BlockLayout> make_block(int n, int order) {
  auto b = std::make_shared<BlockLayout>();
  b->n = n;
  b->order = order;
  MultiIndex cur{};
  enumerate(n, order, 0, cur, 0, b->idx);
  std::stable_sort(b->idx.begin(), b->idx.end(),
                   [](const MultiIndex& l, const MultiIndex& r) {
                     int dl = degree(l), dr = degree(r);
                     if (dl != dr) return dl < dr;
                     return l > r;
                   });
  for (int i = 0; i < static_cast<int>(b->idx.size()); ++i) b->pos[b->idx[i]] = i;
  for (int i = 0; i < static_cast<int>(b->idx.size()); ++i) {
    for (int j = 0; j < static_cast<int>(b->idx.size()); ++j) {
      if (degree(b->idx[i]) + degree(b->idx[j]) > order) continue;
      MultiIndex s{};
      for (int v = 0; v < kMaxDim; ++v) s[v] = b->idx[i][v] + b->idx[j][v];
      b->products.push_back({i, j, b->pos.at(s)});
    }
  }
  return b;
}

std::shared_ptr<const BlockLayout> block(int n, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const BlockLayout>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{n, order}];
  if (!slot) slot = make_block(n, order);
  return slot;
}

}  // namespace

struct JetLayout {
  JetSpec spec;
  std::shared_ptr<const BlockLayout> xb;
  std::shared_ptr<const BlockLayout> yb;
  std::size_t ny() const { return yb->idx.size(); }
  std::size_t size() const { return xb->idx.size() * yb->idx.size(); }
};

namespace {

std::shared_ptr<const JetLayout> layout_for(const JetSpec& spec) {
  thread_local std::shared_ptr<const JetLayout> last;
  if (last && last->spec == spec) return last;
  static std::mutex mu;
  static std::map<JetSpec, std::shared_ptr<const JetLayout>> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(spec);
    if (it != cache.end()) return last = it->second;
  }
  spec.validate();
  auto l = std::make_shared<JetLayout>();
  l->spec = spec;
  l->xb = block(spec.n, spec.max_x_order);
  l->yb = block(spec.n, spec.max_y_order);
  std::lock_guard lock(mu);
  auto& slot = cache[spec];
  if (!slot) slot = l;
  return last = slot;
}

JetSpec common_spec(const JetSpec& a, const JetSpec& b) {
  if (a.n != b.n) throw ConfigurationError("jet dimension mismatch");
  return {a.n, std::min(a.max_x_order, b.max_x_order),
          std::min(a.max_y_order, b.max_y_order)};
}

}  // namespace

// Grants the free functions below access to the private constructor.
struct JetAccess {
  static Jet make(std::shared_ptr<const JetLayout> l, std::vector<double> c) {
    return Jet(std::move(l), std::move(c));
  }
  static const std::shared_ptr<const JetLayout>& layout(const Jet& j) {
    return j.layout_;
  }
  static std::vector<double>& coeffs(Jet& j) { return j.coeffs_; }
};

void JetSpec::validate() const {
  if (n < 2 || n > kMaxDim) {
    std::ostringstream os;
    os << "jet dimension " << n << " outside supported range [2, " << kMaxDim << "]";
    throw ConfigurationError(os.str());
  }
  if (max_x_order < 0 || max_x_order > kMaxXOrder || max_y_order < 0 ||
      max_y_order > kMaxYOrder) {
    std::ostringstream os;
    os << "jet orders (" << max_x_order << ", " << max_y_order
       << ") exceed supported maxima (" << kMaxXOrder << ", " << kMaxYOrder << ")";
    throw ConfigurationError(os.str());
  }
}

Jet::Jet(const JetSpec& spec, double value) : layout_(layout_for(spec)) {
  coeffs_.assign(layout_->size(), 0.0);
  coeffs_[0] = value;
}

Jet::Jet(std::shared_ptr<const JetLayout> layout, std::vector<double> coeffs)
    : layout_(std::move(layout)), coeffs_(std::move(coeffs)) {}

const JetSpec& Jet::spec() const {
  if (!layout_) throw ConfigurationError("use of an empty jet");
  return layout_->spec;
}

double Jet::coeff(const MultiIndex& a, const MultiIndex& b) const {
  const auto& l = *layout_;
  if (degree(a) > l.spec.max_x_order || degree(b) > l.spec.max_y_order)
    throw ConfigurationError("requested jet coefficient beyond truncation order");
  for (int v = l.spec.n; v < kMaxDim; ++v)
    if (a[v] != 0 || b[v] != 0)
      throw ConfigurationError("multi-index refers to a variable beyond the jet dimension");
  return coeffs_[l.xb->pos.at(a) * l.ny() + l.yb->pos.at(b)];
}

double Jet::partial(const MultiIndex& a, const MultiIndex& b) const {
  return coeff(a, b) * factorial_weight(a) * factorial_weight(b);
}

Jet Jet::d_x(int i) const {
  const auto& s = spec();
  if (s.max_x_order < 1) throw ConfigurationError("x-derivative of a jet with x-order 0");
  auto out_l = layout_for({s.n, s.max_x_order - 1, s.max_y_order});
  std::vector<double> out(out_l->size(), 0.0);
  const auto ny = layout_->ny();
  for (std::size_t ia = 0; ia < out_l->xb->idx.size(); ++ia) {
    MultiIndex src = out_l->xb->idx[ia];
    const double f = src[i] + 1;
    src[i] += 1;
    const auto sa = static_cast<std::size_t>(layout_->xb->pos.at(src));
    for (std::size_t ib = 0; ib < ny; ++ib) out[ia * ny + ib] = f * coeffs_[sa * ny + ib];
  }
  return Jet(out_l, std::move(out));
}

Jet Jet::d_y(int i) const {
  const auto& s = spec();
  if (s.max_y_order < 1) throw ConfigurationError("y-derivative of a jet with y-order 0");
  auto out_l = layout_for({s.n, s.max_x_order, s.max_y_order - 1});
  const auto ny_in = layout_->ny();
  const auto ny_out = out_l->ny();
  std::vector<double> out(out_l->size(), 0.0);
  for (std::size_t ib = 0; ib < ny_out; ++ib) {
    MultiIndex src = out_l->yb->idx[ib];
    const double f = src[i] + 1;
    src[i] += 1;
    const auto sb = static_cast<std::size_t>(layout_->yb->pos.at(src));
    for (std::size_t ia = 0; ia < out_l->xb->idx.size(); ++ia)
      out[ia * ny_out + ib] = f * coeffs_[ia * ny_in + sb];
  }
  return Jet(out_l, std::move(out));
}

Jet Jet::truncate(const JetSpec& target) const {
  const auto& s = spec();
  if (target == s) return *this;
  if (target.n != s.n || target.max_x_order > s.max_x_order ||
      target.max_y_order > s.max_y_order)
    throw ConfigurationError("jet truncation cannot raise orders");
  auto out_l = layout_for(target);
  const auto ny_in = layout_->ny();
  const auto ny_out = out_l->ny();
  std::vector<double> out(out_l->size());
  // Both blocks are degree-sorted, so lower-order blocks are prefixes.
  for (std::size_t ia = 0; ia < out_l->xb->idx.size(); ++ia)
    for (std::size_t ib = 0; ib < ny_out; ++ib)
      out[ia * ny_out + ib] = coeffs_[ia * ny_in + ib];
  return Jet(out_l, std::move(out));
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  auto cs = common_spec(spec(), o.spec());
  if (cs != spec()) *this = truncate(cs);
  const Jet& b = o.spec() == cs ? o : o.truncate(cs);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += b.coeffs_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  auto cs = common_spec(spec(), o.spec());
  if (cs != spec()) *this = truncate(cs);
  const Jet& b = o.spec() == cs ? o : o.truncate(cs);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= b.coeffs_[k];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }
Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }
Jet& Jet::operator+=(double c) { coeffs_[0] += c; return *this; }
Jet& Jet::operator-=(double c) { coeffs_[0] -= c; return *this; }
Jet& Jet::operator*=(double c) { for (auto& v : coeffs_) v *= c; return *this; }
Jet& Jet::operator/=(double c) { for (auto& v : coeffs_) v /= c; return *this; }

namespace {

void mul_raw(const JetLayout& l, const double* a, const double* b, double* out) {
  const auto ny = l.ny();
  std::fill(out, out + l.size(), 0.0);
  for (const auto& [xi, xj, xk] : l.xb->products) {
    const double* pa = a + xi * ny;
    const double* pb = b + xj * ny;
    double* po = out + xk * ny;
    for (const auto& [yi, yj, yk] : l.yb->products) po[yk] += pa[yi] * pb[yj];
  }
}

}  // namespace

Jet operator*(const Jet& a_in, const Jet& b_in) {
  auto cs = common_spec(a_in.spec(), b_in.spec());
  // copy only when a truncation is needed
  Jet ta, tb;
  if (!(a_in.spec() == cs)) ta = a_in.truncate(cs);
  if (!(b_in.spec() == cs)) tb = b_in.truncate(cs);
  const Jet& a = ta.empty() ? a_in : ta;
  const Jet& b = tb.empty() ? b_in : tb;
  std::vector<double> out(a.layout_->size());
  mul_raw(*a.layout_, a.coeffs_.data(), b.coeffs_.data(), out.data());
  return Jet(a.layout_, std::move(out));
}

Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }
Jet operator/(double c, const Jet& a) { return recip(a) * c; }

namespace {

// sum_k taylor[k] h^k with h = a - a(0), which is nilpotent of index
// total_order + 1.
Jet compose(const Jet& a, const std::vector<double>& taylor) {
  const auto& l = JetAccess::layout(a);
  std::vector<double> h(a.coeffs().begin(), a.coeffs().end());
  h[0] = 0.0;
  std::vector<double> r(h.size(), 0.0), tmp(h.size());
  r[0] = taylor.back();
  for (int k = static_cast<int>(taylor.size()) - 2; k >= 0; --k) {
    mul_raw(*l, r.data(), h.data(), tmp.data());
    std::swap(r, tmp);
    r[0] += taylor[k];
  }
  return JetAccess::make(l, std::move(r));
}

int nilpotency(const Jet& a) { return a.spec().total_order(); }

void require_positive(const Jet& a, const char* op) {
  if (!(a.value() > 0.0)) {
    std::ostringstream os;
    os << op << " of a jet with nonpositive constant term " << a.value();
    throw DomainError(os.str());
  }
}

}  // namespace

Jet recip(const Jet& a) {
  const double a0 = a.value();
  if (a0 == 0.0 || !std::isfinite(a0))
    throw DomainError("division by a jet with zero constant term");
  const int K = nilpotency(a);
  std::vector<double> t(K + 1);
  double p = 1.0 / a0;
  for (int k = 0; k <= K; ++k) {
    t[k] = (k % 2 == 0 ? 1.0 : -1.0) * p;
    p /= a0;
  }
  return compose(a, t);
}

Jet pow(const Jet& a, double exponent) {
  const double a0 = a.value();
  const bool integral = exponent == std::floor(exponent);
  const bool ok = integral ? (exponent >= 0 || a0 != 0.0) : a0 > 0.0;
  if (!ok) {
    std::ostringstream os;
    os << "pow of a jet with constant term " << a0;
    throw DomainError(os.str());
  }
  const int K = nilpotency(a);
  std::vector<double> t(K + 1);
  double binom = 1.0;
  for (int k = 0; k <= K; ++k) {
    t[k] = binom == 0.0 ? 0.0 : binom * std::pow(a0, exponent - k);
    binom *= (exponent - k) / (k + 1);
  }
  return compose(a, t);
}

Jet sqrt(const Jet& a) {
  require_positive(a, "sqrt");
  return pow(a, 0.5);
}

Jet log(const Jet& a) {
  require_positive(a, "ln");
  const double a0 = a.value();
  const int K = nilpotency(a);
  std::vector<double> t(K + 1);
  t[0] = std::log(a0);
  double p = a0;
  for (int k = 1; k <= K; ++k) {
    t[k] = (k % 2 == 1 ? 1.0 : -1.0) / (k * p);
    p *= a0;
  }
  return compose(a, t);
}

Jet exp(const Jet& a) {
  const int K = nilpotency(a);
  std::vector<double> t(K + 1);
  double f = std::exp(a.value());
  for (int k = 0; k <= K; ++k) {
    t[k] = f;
    f /= (k + 1);
  }
  return compose(a, t);
}

namespace {

// Taylor coefficients of a function whose derivatives cycle with period 4
// (sin, cos) or 2 (sinh, cosh).
Jet cyclic(const Jet& a, const std::vector<double>& cycle) {
  const int K = nilpotency(a);
  std::vector<double> t(K + 1);
  double inv_fact = 1.0;
  for (int k = 0; k <= K; ++k) {
    t[k] = cycle[k % cycle.size()] * inv_fact;
    inv_fact /= (k + 1);
  }
  return compose(a, t);
}

}  // namespace

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return cyclic(a, {s, c, -s, -c});
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return cyclic(a, {c, -s, -c, s});
}

Jet sinh(const Jet& a) {
  return cyclic(a, {std::sinh(a.value()), std::cosh(a.value())});
}

Jet cosh(const Jet& a) {
  return cyclic(a, {std::cosh(a.value()), std::sinh(a.value())});
}

Jet pow(const Jet& a, const Jet& p) { return exp(p * log(a)); }

Jet smooth_max(const Jet& a, const Jet& b, double width) {
  const Jet d = a - b;
  return 0.5 * (a + b + sqrt(d * d + width * width));
}

double smooth_max(double a, double b, double width) {
  return 0.5 * (a + b + std::sqrt((a - b) * (a - b) + width * width));
}

std::vector<Jet> lift(std::span<const double> x, std::span<const double> y,
                      const JetSpec& spec) {
  spec.validate();
  if (static_cast<int>(x.size()) != spec.n || static_cast<int>(y.size()) != spec.n)
    throw ConfigurationError("lift point must have 2n coordinates");
  auto l = layout_for(spec);
  const auto ny = l->ny();
  std::vector<Jet> out;
  out.reserve(2 * spec.n);
  for (int i = 0; i < spec.n; ++i) {
    std::vector<double> c(l->size(), 0.0);
    c[0] = x[i];
    if (spec.max_x_order >= 1) c[l->xb->pos.at(unit_index(i)) * ny] = 1.0;
    out.push_back(JetAccess::make(l, std::move(c)));
  }
  for (int i = 0; i < spec.n; ++i) {
    std::vector<double> c(l->size(), 0.0);
    c[0] = y[i];
    if (spec.max_y_order >= 1) c[l->yb->pos.at(unit_index(i))] = 1.0;
    out.push_back(JetAccess::make(l, std::move(c)));
  }
  return out;
}

MultiIndex unit_index(int i) {
  MultiIndex m{};
  m[i] = 1;
  return m;
}

MultiIndex make_index(std::initializer_list<int> exps) {
  if (exps.size() > static_cast<std::size_t>(kMaxDim))
    throw ConfigurationError("multi-index longer than the maximum dimension");
  MultiIndex m{};
  int i = 0;
  for (int e : exps) m[i++] = static_cast<std::uint8_t>(e);
  return m;
}

MultiIndex index_of(std::span<const int> vars) {
  MultiIndex m{};
  for (int v : vars) {
    if (v < 0 || v >= kMaxDim) throw ConfigurationError("variable index out of range");
    ++m[static_cast<std::size_t>(v)];
  }
  return m;
}

MultiIndex index_of(std::initializer_list<int> vars) {
  return index_of(std::span<const int>(vars.begin(), vars.size()));
}

double partial(const Jet& j, std::initializer_list<int> x_vars, std::initializer_list<int> y_vars) {
  return j.partial(index_of(x_vars), index_of(y_vars));
}

}  // namespace finsler
