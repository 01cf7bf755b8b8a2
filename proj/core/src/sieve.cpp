#include "subsum/sieve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "subsum/errors.hpp"

namespace subsum {

namespace {

std::uint64_t isqrt(std::uint64_t n) {
  std::uint64_t r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline std::uint64_t odd_index(std::uint64_t n) { return (n - 3) / 2; }

}  // namespace

Sieve::Sieve(std::uint64_t initial_limit, std::uint64_t hard_cap) : hard_cap_(hard_cap) {
  if (hard_cap_ < 16) hard_cap_ = 16;
  limit_ = 3;
  bits_.assign(1, 0);
  bits_[0] = 1;  // 3 is prime
  block_cum_.clear();
  ensure(std::max<std::uint64_t>(initial_limit, 16));
}

std::uint64_t Sieve::limit() const {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  return limit_;
}

void Sieve::ensure(std::uint64_t n) const {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  if (n <= limit_) return;
  if (n > hard_cap_) {
    throw CapacityError("sieve limit request " + std::to_string(n) +
                        " exceeds hard cap " + std::to_string(hard_cap_));
  }
  // Grow at least geometrically to amortize re-marking.
  const std::uint64_t target =
      std::min(hard_cap_, std::max({n, limit_ * 2, std::uint64_t{4096}}));
  extend_locked(target);
}

void Sieve::extend_locked(std::uint64_t target) const {
  // Cover odds up to target (inclusive of the last odd <= target).
  const std::uint64_t old_limit = limit_;
  const std::uint64_t n_odds = target < 3 ? 0 : (target - 3) / 2 + 1;
  const std::uint64_t n_words = (n_odds + 63) / 64;
  const std::uint64_t old_words = bits_.size();
  bits_.resize(n_words, ~0ull);
  // Fresh region starts all-prime; clear slack bits beyond n_odds later.
  if (old_words > 0) {
    // Bits in the last old word past the old coverage were never initialized
    // as candidates; mark them prime before re-marking composites below.
    const std::uint64_t old_odds = old_limit < 3 ? 0 : (old_limit - 3) / 2 + 1;
    for (std::uint64_t i = old_odds; i < std::min(old_words * 64, n_odds); ++i) {
      bits_[i / 64] |= (1ull << (i % 64));
    }
  }

  const std::uint64_t lo = old_limit + 1;  // first new value covered
  const std::uint64_t root = isqrt(target);
  // Base primes p <= root are already sieved (doubling growth guarantees root <= old_limit
  // except at bootstrap, where the loop below self-serves since p*p > old_limit marks from p*p).
  for (std::uint64_t p = 3; p <= root; p += 2) {
    const std::uint64_t bi = odd_index(p);
    if (!(bits_[bi / 64] >> (bi % 64) & 1)) continue;
    // First odd multiple of p in [max(lo, p*p), target].
    std::uint64_t start = std::max(lo, p * p);
    std::uint64_t m = ((start + p - 1) / p) * p;
    if (m % 2 == 0) m += p;
    if (m < p * p) m = p * p;
    for (; m <= target; m += 2 * p) {
      const std::uint64_t i = odd_index(m);
      bits_[i / 64] &= ~(1ull << (i % 64));
    }
  }
  // Clear slack bits in the final word so popcounts are exact.
  const std::uint64_t slack = n_words * 64 - n_odds;
  if (slack > 0) bits_[n_words - 1] &= (~0ull >> slack);

  limit_ = target;

  // Rebuild cumulative block counts for the affected suffix.
  const std::uint64_t words_per_block = kOddsPerBlock / 64;
  const std::uint64_t n_blocks = (n_words + words_per_block - 1) / words_per_block;
  std::uint64_t first_dirty_block = old_words == 0 ? 0 : (old_words - 1) / words_per_block;
  block_cum_.resize(n_blocks, 0);
  std::uint64_t running = first_dirty_block == 0 ? 0 : block_cum_[first_dirty_block - 1];
  for (std::uint64_t b = first_dirty_block; b < n_blocks; ++b) {
    const std::uint64_t w0 = b * words_per_block;
    const std::uint64_t w1 = std::min(n_words, w0 + words_per_block);
    for (std::uint64_t w = w0; w < w1; ++w) running += std::popcount(bits_[w]);
    block_cum_[b] = running;
  }
}

bool Sieve::is_prime(std::uint64_t n) const {
  if (n < 2) return false;
  if (n == 2) return true;
  if (n % 2 == 0) return false;
  std::lock_guard<std::recursive_mutex> lock(mu_);
  if (n > limit_) ensure(n);
  const std::uint64_t i = odd_index(n);
  return (bits_[i / 64] >> (i % 64)) & 1;
}

std::uint64_t Sieve::count_leq_locked(std::uint64_t n) const {
  if (n < 2) return 0;
  if (n < 3) return 1;
  if (n > limit_) ensure(n);
  const std::uint64_t i = odd_index(n % 2 == 0 ? n - 1 : n);  // last odd <= n
  const std::uint64_t words_per_block = kOddsPerBlock / 64;
  const std::uint64_t word = i / 64;
  const std::uint64_t block = word / words_per_block;
  std::uint64_t count = block == 0 ? 0 : block_cum_[block - 1];
  for (std::uint64_t w = block * words_per_block; w < word; ++w) count += std::popcount(bits_[w]);
  const std::uint64_t keep = (i % 64) + 1;
  count += std::popcount(bits_[word] & (keep == 64 ? ~0ull : ((1ull << keep) - 1)));
  return count + 1;  // + prime 2
}

std::uint64_t Sieve::count_primes_leq(std::uint64_t n) const {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  return count_leq_locked(n);
}

std::uint64_t Sieve::nth_prime(std::uint64_t i) const {
  if (i == 0) return 2;
  std::lock_guard<std::recursive_mutex> lock(mu_);
  // Extend until enough primes are covered.
  while (count_leq_locked(limit_) < i + 1) {
    ensure(limit_ * 2);
  }
  const std::uint64_t odd_rank = i;  // odd primes have 1-based rank i in pi-count terms
  // Binary search over blocks, then scan.
  std::uint64_t lo_block = 0, hi_block = block_cum_.size();
  while (lo_block < hi_block) {
    const std::uint64_t mid = (lo_block + hi_block) / 2;
    if (block_cum_[mid] >= odd_rank) hi_block = mid; else lo_block = mid + 1;
  }
  std::uint64_t remaining = odd_rank - (lo_block == 0 ? 0 : block_cum_[lo_block - 1]);
  const std::uint64_t words_per_block = kOddsPerBlock / 64;
  for (std::uint64_t w = lo_block * words_per_block; w < bits_.size(); ++w) {
    const std::uint64_t pc = std::popcount(bits_[w]);
    if (pc < remaining) {
      remaining -= pc;
      continue;
    }
    std::uint64_t word = bits_[w];
    for (std::uint64_t b = 0; b < 64; ++b) {
      if ((word >> b) & 1) {
        if (--remaining == 0) return 3 + 2 * (w * 64 + b);
      }
    }
  }
  throw CapacityError("nth_prime: index " + std::to_string(i) + " not reachable");
}

std::uint64_t Sieve::next_prime_geq(std::uint64_t n) const {
  if (n <= 2) return 2;
  std::lock_guard<std::recursive_mutex> lock(mu_);
  std::uint64_t m = n % 2 == 0 ? n + 1 : n;
  for (;;) {
    if (m > limit_) ensure(m);
    const std::uint64_t i = odd_index(m);
    if ((bits_[i / 64] >> (i % 64)) & 1) return m;
    m += 2;
  }
}

std::vector<std::uint64_t> Sieve::primes_upto(std::uint64_t limit) {
  if (limit < 2) throw InvalidInputError("primes_upto requires limit >= 2");
  // A plain bool sieve is fine here; capacity-guard the allocation.
  constexpr std::uint64_t kSimpleCap = 1ull << 31;
  if (limit > kSimpleCap) {
    throw CapacityError("primes_upto limit " + std::to_string(limit) +
                        " exceeds cap " + std::to_string(kSimpleCap));
  }
  std::vector<char> mark(limit + 1, 1);
  mark[0] = 0;
  mark[1] = 0;
  for (std::uint64_t i = 2; i * i <= limit; ++i) {
    if (!mark[i]) continue;
    for (std::uint64_t j = i * i; j <= limit; j += i) mark[j] = 0;
  }
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (mark[i]) out.push_back(i);
  }
  return out;
}

}  // namespace subsum
