#include "subsum/prime_pool.hpp"

#include <algorithm>
#include <cmath>

#include "subsum/errors.hpp"

namespace subsum {

// ---------------------------------------------------------------------------
// PoolHandle
// ---------------------------------------------------------------------------

struct PoolHandle::Node {
  enum class Kind { kBase, kRemove, kInterleave, kRestrict } kind = Kind::kBase;
  std::shared_ptr<const Node> parent;
  std::shared_ptr<Sieve> sieve;          // kBase only
  std::vector<std::uint64_t> removed;    // kRemove, sorted, members of parent
  unsigned parts = 1;                    // kInterleave
  unsigned index = 0;                    // kInterleave
  std::uint64_t cutoff = 0;              // kRestrict: keep n >= cutoff + 1

  const Sieve& sv() const {
    const Node* n = this;
    while (n->kind != Kind::kBase) n = n->parent.get();
    return *n->sieve;
  }

  std::shared_ptr<Sieve> sv_ptr() const {
    const Node* n = this;
    while (n->kind != Kind::kBase) n = n->parent.get();
    return n->sieve;
  }

  // Index of member n in this node's enumeration.
  std::uint64_t rank(std::uint64_t n) const {
    switch (kind) {
      case Kind::kBase:
        return sv().count_primes_leq(n) - 2;  // odd primes enumerate from 3
      case Kind::kRemove: {
        std::uint64_t r = parent->rank(n);
        std::uint64_t below = 0;
        for (std::uint64_t e : removed) {
          if (e < n) ++below; else break;
        }
        return r - below;
      }
      case Kind::kInterleave:
        return (parent->rank(n) - index) / parts;
      case Kind::kRestrict:
        return parent->rank(n) - parent->count_leq(cutoff);
    }
    return 0;
  }

  std::uint64_t count_leq(std::uint64_t n) const {
    switch (kind) {
      case Kind::kBase:
        return n < 3 ? 0 : sv().count_primes_leq(n) - 1;
      case Kind::kRemove: {
        std::uint64_t c = parent->count_leq(n);
        for (std::uint64_t e : removed) {
          if (e <= n) --c; else break;
        }
        return c;
      }
      case Kind::kInterleave: {
        const std::uint64_t c = parent->count_leq(n);
        if (c <= index) return 0;
        return (c - index - 1) / parts + 1;
      }
      case Kind::kRestrict: {
        const std::uint64_t c = parent->count_leq(n);
        const std::uint64_t off = parent->count_leq(cutoff);
        return c > off ? c - off : 0;
      }
    }
    return 0;
  }

  bool contains(std::uint64_t n) const {
    switch (kind) {
      case Kind::kBase:
        return n >= 3 && n % 2 == 1 && sv().is_prime(n);
      case Kind::kRemove:
        return parent->contains(n) && !std::binary_search(removed.begin(), removed.end(), n);
      case Kind::kInterleave:
        return parent->contains(n) && parent->rank(n) % parts == index;
      case Kind::kRestrict:
        return n >= cutoff + 1 && parent->contains(n);
    }
    return false;
  }

  std::uint64_t element(std::size_t i) const {
    switch (kind) {
      case Kind::kBase:
        return sv().nth_prime(i + 1);
      case Kind::kRemove: {
        std::uint64_t j = i;
        for (std::uint64_t e : removed) {
          if (parent->rank(e) <= j) ++j; else break;
        }
        return parent->element(j);
      }
      case Kind::kInterleave:
        return parent->element(static_cast<std::size_t>(i) * parts + index);
      case Kind::kRestrict:
        return parent->element(i + parent->count_leq(cutoff));
    }
    return 0;
  }

  std::string provenance() const {
    switch (kind) {
      case Kind::kBase:
        return "P";
      case Kind::kRemove: {
        std::string s = parent->provenance() + "\\{";
        for (std::size_t i = 0; i < removed.size(); ++i) {
          if (i) s += ",";
          s += std::to_string(removed[i]);
        }
        return s + "}";
      }
      case Kind::kInterleave:
        return "split(" + parent->provenance() + "," + std::to_string(parts) + ")[" +
               std::to_string(index) + "]";
      case Kind::kRestrict:
        return "(" + parent->provenance() + ")|>" + std::to_string(cutoff);
    }
    return "?";
  }
};

PoolHandle::PoolHandle(std::shared_ptr<const Node> node) : node_(std::move(node)) {
  marker_ = node_->element(0);
}

PoolHandle base_pool(std::shared_ptr<Sieve> sieve) {
  auto node = std::make_shared<PoolHandle::Node>();
  node->kind = PoolHandle::Node::Kind::kBase;
  node->sieve = std::move(sieve);
  return PoolHandle(std::move(node));
}

std::vector<std::uint64_t> sieve_primes(std::uint64_t limit) { return Sieve::primes_upto(limit); }

std::uint64_t PoolHandle::element(std::size_t i) const { return node_->element(i); }
bool PoolHandle::contains(std::uint64_t n) const { return node_->contains(n); }
std::uint64_t PoolHandle::count_leq(std::uint64_t n) const { return node_->count_leq(n); }

std::uint64_t PoolHandle::next_after(std::uint64_t n) const {
  return node_->element(node_->count_leq(n));
}

PoolHandle PoolHandle::remove(std::vector<std::uint64_t> elems) const {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  std::vector<std::uint64_t> members;
  for (std::uint64_t e : elems) {
    if (node_->contains(e)) members.push_back(e);
  }
  auto node = std::make_shared<Node>();
  node->kind = Node::Kind::kRemove;
  node->parent = node_;
  node->removed = std::move(members);
  return PoolHandle(std::move(node));
}

PoolHandle PoolHandle::restrict_above(std::uint64_t k) const {
  if (k == 0) return *this;
  auto node = std::make_shared<Node>();
  node->kind = Node::Kind::kRestrict;
  node->parent = node_;
  node->cutoff = k;
  return PoolHandle(std::move(node));
}

std::vector<PoolHandle> PoolHandle::split(unsigned parts) const {
  if (parts == 0) throw InvalidInputError("split requires parts >= 1");
  if (parts == 1) return {*this};
  std::vector<PoolHandle> out;
  out.reserve(parts);
  for (unsigned j = 0; j < parts; ++j) {
    auto node = std::make_shared<Node>();
    node->kind = Node::Kind::kInterleave;
    node->parent = node_;
    node->parts = parts;
    node->index = j;
    out.push_back(PoolHandle(std::move(node)));
  }
  return out;
}

double PoolHandle::reciprocal_sum_leq(std::uint64_t bound) const {
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0;; ++i) {
    const std::uint64_t p = node_->element(i);
    if (p > bound) break;
    const double term = 1.0 / static_cast<double>(p);
    const double t = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

std::string PoolHandle::provenance() const { return node_->provenance(); }

std::shared_ptr<Sieve> PoolHandle::sieve() const { return node_->sv_ptr(); }

// ---------------------------------------------------------------------------
// EDeltaSeq
// ---------------------------------------------------------------------------

struct EDeltaSeq::State {
  std::vector<std::uint64_t> elems;
  std::optional<PoolHandle> pool;  // pool-backed generation
  std::function<std::uint64_t(std::uint64_t)> next_fn;  // synthetic generation
  double delta = 1.0;
  double eps = 1.0 / 3.0;
  Parity parity = Parity::kOdd;
  std::size_t max_elements = 1u << 22;

  // Smallest pool element in (a(1+delta/3), a(1+delta)], or 0 if the window
  // is empty.
  std::uint64_t window_next(std::uint64_t a) const {
    const long double lo = static_cast<long double>(a) * (1.0L + static_cast<long double>(delta) / 3.0L);
    const long double hi = static_cast<long double>(a) * (1.0L + static_cast<long double>(delta));
    const std::uint64_t floor_lo = static_cast<std::uint64_t>(lo);
    std::uint64_t c = pool->next_after(floor_lo);
    while (static_cast<long double>(c) <= lo) c = pool->next_after(c);
    if (static_cast<long double>(c) > hi) return 0;
    return c;
  }

  void extend_to(std::size_t count) {
    while (elems.size() < count) {
      if (elems.size() >= max_elements) {
        throw CapacityError("EDeltaSeq materialization cap " + std::to_string(max_elements) +
                            " reached");
      }
      const std::uint64_t a = elems.back();
      std::uint64_t nxt = 0;
      if (pool.has_value()) {
        nxt = window_next(a);
        if (nxt == 0) {
          const double wl = static_cast<double>(a) * (1.0 + delta / 3.0);
          const double wh = static_cast<double>(a) * (1.0 + delta);
          throw EDeltaError("empty window (" + std::to_string(wl) + ", " + std::to_string(wh) +
                                "] past element " + std::to_string(a),
                            a, wl, wh);
        }
      } else {
        nxt = next_fn(a);
        if (nxt <= a) {
          throw EDeltaError("synthetic generator not increasing past " + std::to_string(a), a, 0,
                            0);
        }
      }
      elems.push_back(nxt);
    }
  }
};

EDeltaSeq EDeltaSeq::extract(const PoolHandle& pool, double delta, std::uint64_t start_hint,
                             const ExtractOptions& opts) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw InvalidInputError("extract_edelta requires delta in (0, 1]");
  }
  auto st = std::make_shared<State>();
  st->pool = pool;
  st->delta = delta;
  st->eps = delta / 3.0;
  st->parity = Parity::kOdd;
  st->max_elements = opts.max_elements;

  // Commit to a start only after `lookahead` consecutive windows succeed.
  std::uint64_t candidate = start_hint <= pool.element(0) ? pool.element(0)
                                                          : pool.next_after(start_hint - 1);
  std::uint64_t first_bad = 0;
  double first_bad_lo = 0, first_bad_hi = 0;
  const std::uint64_t chain_cap = std::max(opts.lookahead_value_cap, 4 * candidate);
  for (std::size_t attempt = 0; attempt <= opts.max_start_retries; ++attempt) {
    std::vector<std::uint64_t> probe{candidate};
    bool ok = true;
    for (std::size_t i = 0; i < opts.lookahead && probe.back() <= chain_cap; ++i) {
      const std::uint64_t nxt = st->window_next(probe.back());
      if (nxt == 0) {
        ok = false;
        first_bad = probe.back();
        first_bad_lo = static_cast<double>(probe.back()) * (1.0 + delta / 3.0);
        first_bad_hi = static_cast<double>(probe.back()) * (1.0 + delta);
        break;
      }
      probe.push_back(nxt);
    }
    if (ok) {
      st->elems = std::move(probe);
      return EDeltaSeq(std::move(st));
    }
    candidate = pool.next_after(candidate);
  }
  throw EDeltaError("no start with " + std::to_string(opts.lookahead) +
                        " nonempty windows within " + std::to_string(opts.max_start_retries) +
                        " candidates; first empty window (" + std::to_string(first_bad_lo) +
                        ", " + std::to_string(first_bad_hi) + "] past " +
                        std::to_string(first_bad),
                    first_bad, first_bad_lo, first_bad_hi);
}

EDeltaSeq EDeltaSeq::synthetic(std::vector<std::uint64_t> prefix,
                               std::function<std::uint64_t(std::uint64_t)> next, double delta,
                               double eps, Parity parity) {
  if (prefix.empty()) throw InvalidInputError("synthetic EDeltaSeq needs a nonempty prefix");
  auto st = std::make_shared<State>();
  st->elems = std::move(prefix);
  st->next_fn = std::move(next);
  st->delta = delta;
  st->eps = eps;
  st->parity = parity;
  return EDeltaSeq(std::move(st));
}

std::uint64_t EDeltaSeq::element(std::size_t i) const {
  if (i >= st_->elems.size()) st_->extend_to(i + 1);
  return st_->elems[i];
}

bool EDeltaSeq::contains(std::uint64_t n) const {
  while (st_->elems.back() < n) st_->extend_to(st_->elems.size() + 1);
  return std::binary_search(st_->elems.begin(), st_->elems.end(), n);
}

std::size_t EDeltaSeq::materialized() const { return st_->elems.size(); }
double EDeltaSeq::delta() const { return st_->delta; }
double EDeltaSeq::eps() const { return st_->eps; }
Parity EDeltaSeq::parity() const { return st_->parity; }

std::string EDeltaSeq::describe() const {
  std::string s = "edelta(delta=" + std::to_string(st_->delta) +
                  ",start=" + std::to_string(st_->elems.front());
  if (st_->pool.has_value()) s += ",pool=" + st_->pool->provenance();
  return s + ")";
}

EDeltaSeq extract_edelta(const PoolHandle& pool, double delta, std::uint64_t start_hint,
                         const ExtractOptions& opts) {
  return EDeltaSeq::extract(pool, delta, start_hint, opts);
}

// ---------------------------------------------------------------------------
// Divisibility predicates and the prime-window scan
// ---------------------------------------------------------------------------

std::vector<std::uint64_t> odd_prime_factors(std::uint64_t n, const Sieve& sieve) {
  std::vector<std::uint64_t> out;
  if (n == 0) throw InvalidInputError("odd_prime_factors requires n >= 1");
  while (n % 2 == 0) n /= 2;
  std::uint64_t root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n))) + 1;
  sieve.ensure(std::max<std::uint64_t>(root, 3));
  for (std::uint64_t p = 3; p * p <= n; p = sieve.next_prime_geq(p + 1)) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

bool is_constructed_from(std::uint64_t n, const PoolHandle& pool, std::uint64_t p) {
  if (!pool.contains(p)) throw InvalidInputError("marker " + std::to_string(p) + " not in pool");
  if (n == 0 || n % p != 0) return false;
  for (std::uint64_t q : odd_prime_factors(n, *pool.sieve())) {
    if (!pool.contains(q)) return false;
  }
  return true;
}

std::optional<std::uint64_t> gap_scan(double eps, double delta, std::uint64_t n_lo,
                                      std::uint64_t n_hi, const Sieve& sieve) {
  if (!(0.0 < eps && eps < delta && delta <= 1.0)) {
    throw InvalidInputError("gap_scan requires 0 < eps < delta <= 1");
  }
  if (n_lo > n_hi) return std::nullopt;
  sieve.ensure(static_cast<std::uint64_t>(static_cast<double>(n_hi) * (1.0 + delta)) + 2);
  // Two-pointer walk: q tracks the smallest odd prime >= n(1+eps).
  std::uint64_t q = 3;
  for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
    const long double lo = static_cast<long double>(n) * (1.0L + static_cast<long double>(eps));
    const long double hi = static_cast<long double>(n) * (1.0L + static_cast<long double>(delta));
    while (static_cast<long double>(q) < lo) q = sieve.next_prime_geq(q + 1);
    if (static_cast<long double>(q) > hi) return n;
  }
  return std::nullopt;
}

}  // namespace subsum
