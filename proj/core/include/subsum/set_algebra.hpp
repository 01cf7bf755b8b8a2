#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "subsum/prime_pool.hpp"

namespace subsum {

// Pair products were checked injective, and no pair multiplies two even
// factors (so signed sums factor through the product), up to checked_bound.
struct ProductWitness {
  std::uint64_t checked_bound = 0;
  bool injective = false;
  bool sign_compatible = false;
};

struct UnionWitness {
  std::uint64_t checked_bound = 0;
  bool disjoint = false;
};

struct EnumLimits {
  std::size_t max_items = 5'000'000;
};

// Immutable symbolic integer set: a finite list, a lazily generated growth
// sequence, or a product/union of sets. Enumeration is always bound-limited;
// products and unions are never eagerly expanded.
class SetExpr {
 public:
  enum class Kind { kEmpty, kFinite, kGenerated, kProduct, kUnion };

  SetExpr() : SetExpr(empty()) {}

  static SetExpr empty();
  static SetExpr finite(std::vector<std::uint64_t> elems);  // must be strictly increasing
  static SetExpr generated(EDeltaSeq seq);
  static SetExpr product(SetExpr left, SetExpr right,
                         std::optional<ProductWitness> witness = std::nullopt);
  static SetExpr union_of(SetExpr left, SetExpr right,
                          std::optional<UnionWitness> witness = std::nullopt);

  Kind kind() const;
  const std::vector<std::uint64_t>& finite_elems() const;
  const EDeltaSeq& generated_seq() const;
  const SetExpr& left() const;
  const SetExpr& right() const;
  const std::optional<ProductWitness>& product_witness() const;
  const std::optional<UnionWitness>& union_witness() const;

  // Structural class index: atoms sit at depth 1, and a union of a depth-1
  // product's expansion with a peer set sits one level above its children.
  int class_depth() const;

  // All members <= bound, sorted, distinct.
  std::vector<std::uint64_t> enumerate(std::uint64_t bound, const EnumLimits& limits = {}) const;

  bool member(std::uint64_t n) const;

  // Canonical JSON tree (variant tag, children, generator parameters).
  std::string to_json() const;

 private:
  struct Node;
  explicit SetExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct InjectivityResult {
  bool ok = true;
  // A counterexample a1*b1 == a2*b2 with (a1,b1) != (a2,b2), when !ok.
  std::uint64_t a1 = 0, b1 = 0, a2 = 0, b2 = 0;
};

// Verifies injectivity of (a, b) -> a*b over enumerated pairs with product <= bound.
InjectivityResult injectivity_check(const SetExpr& a, const SetExpr& b, std::uint64_t bound,
                                    const EnumLimits& limits = {});

struct DisjointnessResult {
  bool ok = true;
  std::uint64_t shared = 0;  // smallest shared element when !ok
};

DisjointnessResult disjointness_check(const SetExpr& a, const SetExpr& b, std::uint64_t bound,
                                      const EnumLimits& limits = {});

// Witness-carrying builders: run the bounded checks and throw WitnessError on
// failure (a failed check is a construction bug, never silently deduplicated).
SetExpr checked_product(const SetExpr& left, const SetExpr& right, std::uint64_t bound,
                        const EnumLimits& limits = {});
SetExpr checked_union(const SetExpr& left, const SetExpr& right, std::uint64_t bound,
                      const EnumLimits& limits = {});

}  // namespace subsum
