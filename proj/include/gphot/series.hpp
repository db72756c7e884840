/**
 * Copyright 2026 The gphot authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <utility>
#include <vector>

#include "gphot/common.hpp"

namespace gphot {

/// Exponent tuple of a monomial, one entry per formal variable.
using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& k) {
  return std::accumulate(k.begin(), k.end(), 0);
}

/// Truncation box shared by all series of one computation: a variable count
/// and a per-variable maximum order. Coefficients outside the box are
/// discarded by every operation, which keeps in-box coefficients exact
/// (monomial exponents only ever add).
class SeriesContext {
 public:
  explicit SeriesContext(std::vector<int> orders) : orders_(std::move(orders)) {
    std::size_t box = 1;
    for (int o : orders_) {
      if (o < 0) throw domain_error("truncation order must be >= 0");
      box *= static_cast<std::size_t>(o) + 1;
    }
    box_size_ = box;
    strides_.assign(orders_.size(), 1);
    for (int i = static_cast<int>(orders_.size()) - 2; i >= 0; --i)
      strides_[i] = strides_[i + 1] * (orders_[i + 1] + 1);
    // Dense flat storage for few variables, sorted exponent map above.
    dense_ = orders_.size() <= 4 && box_size_ <= (1u << 20);
  }

  int var_count() const { return static_cast<int>(orders_.size()); }
  const std::vector<int>& orders() const { return orders_; }
  int order(int i) const { return orders_[static_cast<std::size_t>(i)]; }
  std::size_t box_size() const { return box_size_; }
  bool dense() const { return dense_; }
  int max_total_degree() const { return total_degree(orders_); }

  bool contains(const MultiIndex& k) const {
    if (k.size() != orders_.size()) return false;
    for (std::size_t i = 0; i < k.size(); ++i)
      if (k[i] < 0 || k[i] > orders_[i]) return false;
    return true;
  }

  std::size_t flat(const MultiIndex& k) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < k.size(); ++i)
      f += static_cast<std::size_t>(k[i]) * strides_[i];
    return f;
  }

  MultiIndex unflat(std::size_t f) const {
    MultiIndex k(orders_.size());
    for (std::size_t i = 0; i < orders_.size(); ++i) {
      k[i] = static_cast<int>(f / strides_[i]);
      f %= strides_[i];
    }
    return k;
  }

  bool compatible(const SeriesContext& other) const { return orders_ == other.orders_; }

 private:
  std::vector<int> orders_;
  std::vector<std::size_t> strides_;
  std::size_t box_size_ = 1;
  bool dense_ = true;
};

using Context = std::shared_ptr<const SeriesContext>;

inline Context make_context(std::vector<int> orders) {
  return std::make_shared<const SeriesContext>(std::move(orders));
}

/// Truncated multivariate power series with complex coefficients: the jet
/// carrying all mixed partial derivatives up to the context's box. Values
/// are immutable once built by the arithmetic below and safe to share
/// between threads.
class Series {
 public:
  Series() = default;

  explicit Series(Context ctx) : ctx_(std::move(ctx)) {
    if (ctx_->dense()) dense_.assign(ctx_->box_size(), cdouble(0.0));
  }

  Series(Context ctx, cdouble constant) : Series(std::move(ctx)) {
    set(MultiIndex(static_cast<std::size_t>(ctx_->var_count()), 0), constant);
  }

  const Context& context() const { return ctx_; }

  cdouble coefficient(const MultiIndex& k) const {
    if (!ctx_->contains(k)) throw domain_error("multi-index outside truncation box");
    if (ctx_->dense()) return dense_[ctx_->flat(k)];
    auto it = sparse_.find(k);
    return it == sparse_.end() ? cdouble(0.0) : it->second;
  }

  cdouble constant_term() const {
    return coefficient(MultiIndex(static_cast<std::size_t>(ctx_->var_count()), 0));
  }

  /// k! * coefficient(k), i.e. the mixed partial derivative at the origin.
  cdouble derivative(const MultiIndex& k) const {
    double f = 1.0;
    for (int e : k) f *= factorial(e);
    return f * coefficient(k);
  }

  void set(const MultiIndex& k, cdouble c) {
    if (!ctx_->contains(k)) throw domain_error("multi-index outside truncation box");
    if (ctx_->dense()) {
      dense_[ctx_->flat(k)] = c;
    } else if (c == cdouble(0.0)) {
      sparse_.erase(k);
    } else {
      sparse_[k] = c;
    }
  }

  void add_to(const MultiIndex& k, cdouble c) {
    if (ctx_->dense()) {
      dense_[ctx_->flat(k)] += c;
    } else {
      sparse_[k] += c;
    }
  }

  /// Visit all stored (exponent, coefficient) pairs, skipping exact zeros.
  template <typename F>
  void for_each(F&& f) const {
    if (ctx_->dense()) {
      for (std::size_t i = 0; i < dense_.size(); ++i)
        if (dense_[i] != cdouble(0.0)) f(ctx_->unflat(i), dense_[i]);
    } else {
      for (const auto& [k, c] : sparse_)
        if (c != cdouble(0.0)) f(k, c);
    }
  }

  friend Series operator+(const Series& a, const Series& b);
  friend Series operator-(const Series& a, const Series& b);
  friend Series operator*(const Series& a, const Series& b);

  Series operator-() const {
    Series r(*this);
    for (auto& c : r.dense_) c = -c;
    for (auto& [k, c] : r.sparse_) c = -c;
    return r;
  }

  Series& operator+=(const Series& b) { return *this = *this + b; }
  Series& operator-=(const Series& b) { return *this = *this - b; }
  Series& operator*=(const Series& b) { return *this = *this * b; }

  Series operator*(cdouble s) const {
    Series r(*this);
    for (auto& c : r.dense_) c *= s;
    for (auto& [k, c] : r.sparse_) c *= s;
    return r;
  }

  Series operator+(cdouble s) const {
    Series r(*this);
    r.add_to(MultiIndex(static_cast<std::size_t>(ctx_->var_count()), 0), s);
    return r;
  }

  Series operator-(cdouble s) const { return *this + (-s); }

 private:
  Context ctx_;
  std::vector<cdouble> dense_;         // used when ctx_->dense()
  std::map<MultiIndex, cdouble> sparse_;  // used otherwise

  friend Series mul_impl(const Series& a, const Series& b);
};

inline void require_same_context(const Series& a, const Series& b) {
  if (!a.context() || !b.context()) throw context_error("series without context");
  if (a.context() != b.context() && !a.context()->compatible(*b.context()))
    throw context_error("series contexts differ");
}

inline Series operator+(const Series& a, const Series& b) {
  require_same_context(a, b);
  Series r(a);
  b.for_each([&](const MultiIndex& k, cdouble c) { r.add_to(k, c); });
  return r;
}

inline Series operator-(const Series& a, const Series& b) {
  require_same_context(a, b);
  Series r(a);
  b.for_each([&](const MultiIndex& k, cdouble c) { r.add_to(k, -c); });
  return r;
}

inline Series mul_impl(const Series& a, const Series& b) {
  const auto& ctx = *a.context();
  Series r(a.context());
  const auto& ord = ctx.orders();
  // Cauchy product restricted to the box; out-of-box terms cannot feed back
  // into in-box coefficients, so dropping them is exact.
  a.for_each([&](const MultiIndex& ka, cdouble ca) {
    b.for_each([&](const MultiIndex& kb, cdouble cb) {
      MultiIndex k(ka.size());
      for (std::size_t i = 0; i < ka.size(); ++i) {
        k[i] = ka[i] + kb[i];
        if (k[i] > ord[i]) return;
      }
      r.add_to(k, ca * cb);
    });
  });
  return r;
}

inline Series operator*(const Series& a, const Series& b) {
  require_same_context(a, b);
  return mul_impl(a, b);
}

inline Series operator*(cdouble s, const Series& a) { return a * s; }

inline Series constant(const Context& ctx, cdouble value) { return Series(ctx, value); }

/// The series `base + x_i` (the linear term silently truncates away when the
/// box order of variable i is zero).
inline Series variable(const Context& ctx, int i, cdouble base = 0.0) {
  if (i < 0 || i >= ctx->var_count()) throw domain_error("variable index out of range");
  Series s(ctx, base);
  if (ctx->order(i) >= 1) {
    MultiIndex k(static_cast<std::size_t>(ctx->var_count()), 0);
    k[static_cast<std::size_t>(i)] = 1;
    s.set(k, 1.0);
  }
  return s;
}

namespace detail {

/// Entries of `s` grouped by total degree (index = degree).
inline std::vector<std::vector<std::pair<MultiIndex, cdouble>>> degree_buckets(const Series& s) {
  std::vector<std::vector<std::pair<MultiIndex, cdouble>>> buckets(
      static_cast<std::size_t>(s.context()->max_total_degree()) + 1);
  s.for_each([&](const MultiIndex& k, cdouble c) {
    buckets[static_cast<std::size_t>(total_degree(k))].emplace_back(k, c);
  });
  return buckets;
}

}  // namespace detail

/// Multiplicative inverse within the truncation box, built degree by degree
/// from b_d = -(1/a_0) sum_{j>=1} a_j b_{d-j}. The graded recursion has no
/// transient values in unconverged orders (unlike Newton iteration), which
/// keeps high-order coefficients at working precision.
inline Series reciprocal(const Series& a) {
  const cdouble a0 = a.constant_term();
  if (a0 == cdouble(0.0)) throw singular_error("reciprocal of series with zero constant term");
  const Context& ctx = a.context();
  const int dmax = ctx->max_total_degree();
  const cdouble inv_a0 = 1.0 / a0;

  auto abuckets = detail::degree_buckets(a);
  Series b(ctx, inv_a0);
  std::vector<std::vector<std::pair<MultiIndex, cdouble>>> bbuckets(
      static_cast<std::size_t>(dmax) + 1);
  bbuckets[0].emplace_back(MultiIndex(static_cast<std::size_t>(ctx->var_count()), 0), inv_a0);

  const auto& ord = ctx->orders();
  for (int d = 1; d <= dmax; ++d) {
    std::map<MultiIndex, cdouble> comp;
    for (int j = 1; j <= d && j < static_cast<int>(abuckets.size()); ++j) {
      for (const auto& [k1, c1] : abuckets[static_cast<std::size_t>(j)]) {
        for (const auto& [k2, c2] : bbuckets[static_cast<std::size_t>(d - j)]) {
          MultiIndex k(k1.size());
          bool ok = true;
          for (std::size_t i = 0; i < k.size(); ++i) {
            k[i] = k1[i] + k2[i];
            if (k[i] > ord[i]) { ok = false; break; }
          }
          if (ok) comp[k] += c1 * c2;
        }
      }
    }
    for (const auto& [k, c] : comp) {
      cdouble v = -inv_a0 * c;
      if (v != cdouble(0.0)) {
        b.add_to(k, v);
        bbuckets[static_cast<std::size_t>(d)].emplace_back(k, v);
      }
    }
  }
  return b;
}

/// exp of a series. The constant term passes through std::exp; the rest is
/// propagated degree by degree through the Euler identity th(exp u) =
/// (th u) exp u, th = sum_i x_i d/dx_i, which costs one boxed product.
inline Series exp(const Series& a) {
  const Context& ctx = a.context();
  const cdouble a0 = a.constant_term();
  const int dmax = ctx->max_total_degree();

  // theta(a): scale each coefficient by its total degree (kills a0).
  Series theta(ctx);
  a.for_each([&](const MultiIndex& k, cdouble c) {
    int d = total_degree(k);
    if (d > 0) theta.set(k, static_cast<double>(d) * c);
  });
  auto tbuckets = detail::degree_buckets(theta);

  Series b(ctx, std::exp(a0));
  std::vector<std::vector<std::pair<MultiIndex, cdouble>>> bbuckets(
      static_cast<std::size_t>(dmax) + 1);
  bbuckets[0].emplace_back(MultiIndex(static_cast<std::size_t>(ctx->var_count()), 0),
                           std::exp(a0));

  const auto& ord = ctx->orders();
  for (int d = 1; d <= dmax; ++d) {
    std::map<MultiIndex, cdouble> comp;
    for (int j = 1; j <= d; ++j) {
      for (const auto& [k1, c1] : tbuckets[static_cast<std::size_t>(j)]) {
        for (const auto& [k2, c2] : bbuckets[static_cast<std::size_t>(d - j)]) {
          MultiIndex k(k1.size());
          bool ok = true;
          for (std::size_t i = 0; i < k.size(); ++i) {
            k[i] = k1[i] + k2[i];
            if (k[i] > ord[i]) { ok = false; break; }
          }
          if (ok) comp[k] += c1 * c2;
        }
      }
    }
    for (const auto& [k, c] : comp) {
      cdouble v = c / static_cast<double>(d);
      if (v != cdouble(0.0)) {
        b.add_to(k, v);
        bbuckets[static_cast<std::size_t>(d)].emplace_back(k, v);
      }
    }
  }
  return b;
}

/// Principal-branch log; constant term must avoid the cut (-inf, 0].
/// Uses th(log a) = th(a)/a, then divides each coefficient by its degree.
inline Series log(const Series& a) {
  const cdouble a0 = a.constant_term();
  if (a0 == cdouble(0.0)) throw singular_error("log of series with zero constant term");
  if (a0.imag() == 0.0 && a0.real() < 0.0)
    throw singular_error("log of series with constant term on the branch cut");
  const Context& ctx = a.context();

  Series theta(ctx);
  a.for_each([&](const MultiIndex& k, cdouble c) {
    int d = total_degree(k);
    if (d > 0) theta.set(k, static_cast<double>(d) * c);
  });
  Series t = theta * reciprocal(a);

  Series r(ctx, std::log(a0));
  t.for_each([&](const MultiIndex& k, cdouble c) {
    int d = total_degree(k);
    if (d > 0) r.set(k, c / static_cast<double>(d));
  });
  return r;
}

/// Integer power by repeated squaring (exact ring arithmetic).
inline Series pow_int(const Series& a, long long e) {
  if (e < 0) return reciprocal(pow_int(a, -e));
  Series r(a.context(), 1.0);
  Series base = a;
  while (e > 0) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

/// a^e. Integer exponents use repeated squaring; anything else goes through
/// exp(e log a) and inherits the branch-cut precondition of log.
inline Series pow_real(const Series& a, double e) {
  if (e == std::nearbyint(e) && std::abs(e) < 1e15)
    return pow_int(a, static_cast<long long>(e));
  return exp(log(a) * cdouble(e));
}

inline std::ostream& operator<<(std::ostream& os, const Series& s) {
  bool first = true;
  s.for_each([&](const MultiIndex& k, cdouble c) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
    for (std::size_t i = 0; i < k.size(); ++i)
      if (k[i] > 0) os << "*x" << i << "^" << k[i];
  });
  if (first) os << "0";
  return os;
}

}  // namespace gphot
