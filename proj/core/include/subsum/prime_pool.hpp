#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "subsum/sieve.hpp"

namespace subsum {

enum class Parity { kOdd, kEven, kMixed };

// An immutable, lazily enumerable subset of the odd primes. Handles are built
// from a base pool by removing finitely many elements, interleaving into d
// parts by enumeration index, and restricting to elements above a cutoff.
// Two parts of the same split enumerate disjoint sets; all queries are exact.
class PoolHandle {
 public:
  // i-th element in increasing order (0-based). Extends the sieve on demand.
  std::uint64_t element(std::size_t i) const;
  bool contains(std::uint64_t n) const;
  // Number of elements <= n.
  std::uint64_t count_leq(std::uint64_t n) const;
  // Smallest element > n.
  std::uint64_t next_after(std::uint64_t n) const;
  // Designated member prime (first element at construction time).
  std::uint64_t marker() const { return marker_; }

  PoolHandle remove(std::vector<std::uint64_t> elems) const;
  PoolHandle restrict_above(std::uint64_t k) const;  // keeps {n in pool : n >= k+1}
  std::vector<PoolHandle> split(unsigned parts) const;

  // Plain double partial sum of 1/p over elements <= bound. Desk-scale
  // surrogate for the (untestable) divergence of the reciprocal sum.
  double reciprocal_sum_leq(std::uint64_t bound) const;

  // Human-readable provenance path, for reports.
  std::string provenance() const;

  std::shared_ptr<Sieve> sieve() const;

  friend PoolHandle base_pool(std::shared_ptr<Sieve> sieve);

 private:
  struct Node;
  explicit PoolHandle(std::shared_ptr<const Node> node);

  std::shared_ptr<const Node> node_;
  std::uint64_t marker_ = 0;
};

// The pool of all odd primes 3, 5, 7, 11, ...
PoolHandle base_pool(std::shared_ptr<Sieve> sieve);

// All primes <= limit, ascending (2 included).
std::vector<std::uint64_t> sieve_primes(std::uint64_t limit);

struct ExtractOptions {
  std::size_t lookahead = 64;  // consecutive nonempty windows required at the start
  // The confidence chain stops early past this value: window lengths grow
  // linearly while prime gaps stay polylogarithmic, so only the shallow
  // windows carry any emptiness risk.
  std::uint64_t lookahead_value_cap = 10'000'000;
  std::size_t max_start_retries = 4096;
  std::size_t max_elements = 1u << 22;
};

// Increasing sequence with consecutive ratios in (1 + delta/3, 1 + delta].
// Pool extractions enumerate odd primes; synthetic sequences (any parity)
// serve as fixtures and carry caller-declared ratio bounds.
class EDeltaSeq {
 public:
  // Next element after a: the smallest pool element in (a(1+delta/3), a(1+delta)].
  // The start is the first pool element >= start_hint from which `lookahead`
  // consecutive windows are nonempty; the search advances through the pool on
  // failure, up to max_start_retries, then raises EDeltaError naming the first
  // empty window of the last attempt.
  static EDeltaSeq extract(const PoolHandle& pool, double delta, std::uint64_t start_hint,
                           const ExtractOptions& opts = {});

  static EDeltaSeq synthetic(std::vector<std::uint64_t> prefix,
                             std::function<std::uint64_t(std::uint64_t)> next, double delta,
                             double eps, Parity parity);

  // i-th element (0-based); extends on demand, throws EDeltaError on an empty
  // window and CapacityError past max_elements.
  std::uint64_t element(std::size_t i) const;
  bool contains(std::uint64_t n) const;  // materializes up to n

  std::size_t materialized() const;
  double delta() const;
  double eps() const;  // enforced lower ratio bound
  Parity parity() const;
  std::uint64_t start() const { return element(0); }
  std::string describe() const;
  // Stable identity of the shared generation state.
  const void* id() const { return st_.get(); }

 private:
  struct State;
  explicit EDeltaSeq(std::shared_ptr<State> st) : st_(std::move(st)) {}
  std::shared_ptr<State> st_;
};

EDeltaSeq extract_edelta(const PoolHandle& pool, double delta, std::uint64_t start_hint,
                         const ExtractOptions& opts = {});

// Odd prime factorization support (multiplicity collapsed). Extends the sieve
// to sqrt(n); past the hard cap this raises CapacityError.
std::vector<std::uint64_t> odd_prime_factors(std::uint64_t n, const Sieve& sieve);

// True iff p divides n and every odd prime divisor of n lies in `pool`.
// Requires p in pool.
bool is_constructed_from(std::uint64_t n, const PoolHandle& pool, std::uint64_t p);

// First n in [n_lo, n_hi] whose window [n(1+eps), n(1+delta)] contains no odd
// prime, or nullopt if every window is inhabited. Requires 0 < eps < delta <= 1.
std::optional<std::uint64_t> gap_scan(double eps, double delta, std::uint64_t n_lo,
                                      std::uint64_t n_hi, const Sieve& sieve);

}  // namespace subsum
