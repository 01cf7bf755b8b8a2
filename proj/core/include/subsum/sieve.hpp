#pragma once

#include <cstdint>
#include <mutex>
#include <vector>

namespace subsum {

// Segmented, lazily extensible sieve of Eratosthenes over the odd integers.
// Extension is atomic from the outside: answers for any n never change once
// reported. A hard cap bounds memory; exceeding it raises CapacityError.
class Sieve {
 public:
  explicit Sieve(std::uint64_t initial_limit = 10'000'000,
                 std::uint64_t hard_cap = 2'000'000'000);

  bool is_prime(std::uint64_t n) const;

  // pi(n): number of primes <= n (2 included).
  std::uint64_t count_primes_leq(std::uint64_t n) const;

  // 0-based: nth_prime(0) = 2, nth_prime(1) = 3, ...
  std::uint64_t nth_prime(std::uint64_t i) const;

  // Smallest prime >= n.
  std::uint64_t next_prime_geq(std::uint64_t n) const;

  std::uint64_t limit() const;
  std::uint64_t hard_cap() const { return hard_cap_; }

  // Extend coverage to at least n (rounded up internally).
  void ensure(std::uint64_t n) const;

  // One-shot simple sieve; independent of any Sieve instance.
  static std::vector<std::uint64_t> primes_upto(std::uint64_t limit);

 private:
  void extend_locked(std::uint64_t target) const;
  std::uint64_t count_leq_locked(std::uint64_t n) const;

  static constexpr std::uint64_t kOddsPerBlock = 1ull << 15;  // odds per count block

  mutable std::recursive_mutex mu_;
  mutable std::vector<std::uint64_t> bits_;        // bit i <-> odd n = 3 + 2i, 1 = prime
  mutable std::vector<std::uint64_t> block_cum_;   // cumulative odd-prime count per block
  mutable std::uint64_t limit_ = 0;                // largest n covered
  std::uint64_t hard_cap_;
};

}  // namespace subsum
