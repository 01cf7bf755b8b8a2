#include "subsum/set_algebra.hpp"

#include <algorithm>
#include <array>

#include <nlohmann/json.hpp>

#include "subsum/errors.hpp"

namespace subsum {

using ordered_json = nlohmann::ordered_json;

struct SetExpr::Node {
  Kind kind = Kind::kEmpty;
  std::vector<std::uint64_t> elems;
  std::optional<EDeltaSeq> seq;
  std::optional<SetExpr> left, right;
  std::optional<ProductWitness> pw;
  std::optional<UnionWitness> uw;
  int depth = 1;
};

SetExpr SetExpr::empty() {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kEmpty;
  return SetExpr(std::move(node));
}

SetExpr SetExpr::finite(std::vector<std::uint64_t> elems) {
  for (std::size_t i = 0; i + 1 < elems.size(); ++i) {
    if (elems[i] >= elems[i + 1]) {
      throw InvalidInputError("finite SetExpr requires strictly increasing elements");
    }
  }
  if (!elems.empty() && elems.front() == 0) {
    throw InvalidInputError("SetExpr elements are positive integers");
  }
  if (elems.empty()) return empty();
  auto node = std::make_shared<Node>();
  node->kind = Kind::kFinite;
  node->elems = std::move(elems);
  return SetExpr(std::move(node));
}

SetExpr SetExpr::generated(EDeltaSeq seq) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kGenerated;
  node->seq = std::move(seq);
  return SetExpr(std::move(node));
}

SetExpr SetExpr::product(SetExpr left, SetExpr right, std::optional<ProductWitness> witness) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kProduct;
  const int dl = left.class_depth();
  const int dr = right.class_depth();
  node->depth = dl == 1 ? dr + 1 : dl + dr;
  node->left = std::move(left);
  node->right = std::move(right);
  node->pw = witness;
  return SetExpr(std::move(node));
}

SetExpr SetExpr::union_of(SetExpr left, SetExpr right, std::optional<UnionWitness> witness) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kUnion;
  // Canonical shape: (A*B) u C with A at depth 1 sits at 1 + max(depth B, depth C).
  int depth = 1 + std::max(left.class_depth(), right.class_depth());
  if (left.kind() == Kind::kProduct && left.left().class_depth() == 1) {
    depth = 1 + std::max(left.right().class_depth(), right.class_depth());
  } else if (right.kind() == Kind::kProduct && right.left().class_depth() == 1) {
    depth = 1 + std::max(right.right().class_depth(), left.class_depth());
  }
  node->depth = depth;
  node->left = std::move(left);
  node->right = std::move(right);
  node->uw = witness;
  return SetExpr(std::move(node));
}

SetExpr::Kind SetExpr::kind() const { return node_->kind; }
const std::vector<std::uint64_t>& SetExpr::finite_elems() const { return node_->elems; }
const EDeltaSeq& SetExpr::generated_seq() const { return *node_->seq; }
const SetExpr& SetExpr::left() const { return *node_->left; }
const SetExpr& SetExpr::right() const { return *node_->right; }
const std::optional<ProductWitness>& SetExpr::product_witness() const { return node_->pw; }
const std::optional<UnionWitness>& SetExpr::union_witness() const { return node_->uw; }

int SetExpr::class_depth() const { return node_->depth; }

namespace {

void enumerate_into(const SetExpr& e, std::uint64_t bound, const EnumLimits& limits,
                    std::vector<std::uint64_t>& out) {
  auto guard = [&limits](std::size_t n) {
    if (n > limits.max_items) {
      throw CapacityError("enumeration exceeds cap of " + std::to_string(limits.max_items) +
                          " items");
    }
  };
  switch (e.kind()) {
    case SetExpr::Kind::kEmpty:
      return;
    case SetExpr::Kind::kFinite: {
      for (std::uint64_t v : e.finite_elems()) {
        if (v > bound) break;
        out.push_back(v);
      }
      guard(out.size());
      return;
    }
    case SetExpr::Kind::kGenerated: {
      const EDeltaSeq& seq = e.generated_seq();
      for (std::size_t i = 0;; ++i) {
        const std::uint64_t v = seq.element(i);
        if (v > bound) break;
        out.push_back(v);
        guard(out.size());
      }
      return;
    }
    case SetExpr::Kind::kProduct: {
      std::vector<std::uint64_t> ls = e.left().enumerate(bound, limits);
      if (ls.empty()) return;
      std::vector<std::uint64_t> rs = e.right().enumerate(bound / ls.front(), limits);
      for (std::uint64_t a : ls) {
        for (std::uint64_t b : rs) {
          if (a > bound / b) break;
          out.push_back(a * b);
          guard(out.size());
        }
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return;
    }
    case SetExpr::Kind::kUnion: {
      std::vector<std::uint64_t> ls = e.left().enumerate(bound, limits);
      std::vector<std::uint64_t> rs = e.right().enumerate(bound, limits);
      out.resize(ls.size() + rs.size());
      std::merge(ls.begin(), ls.end(), rs.begin(), rs.end(), out.begin());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      guard(out.size());
      return;
    }
  }
}

}  // namespace

std::vector<std::uint64_t> SetExpr::enumerate(std::uint64_t bound, const EnumLimits& limits) const {
  std::vector<std::uint64_t> out;
  enumerate_into(*this, bound, limits, out);
  return out;
}

bool SetExpr::member(std::uint64_t n) const {
  if (n == 0) return false;
  switch (kind()) {
    case Kind::kEmpty:
      return false;
    case Kind::kFinite:
      return std::binary_search(node_->elems.begin(), node_->elems.end(), n);
    case Kind::kGenerated:
      return node_->seq->contains(n);
    case Kind::kProduct: {
      // Divisor-split search over the left factor.
      for (std::uint64_t a : left().enumerate(n)) {
        if (n % a == 0 && right().member(n / a)) return true;
      }
      return false;
    }
    case Kind::kUnion:
      return left().member(n) || right().member(n);
  }
  return false;
}

InjectivityResult injectivity_check(const SetExpr& a, const SetExpr& b, std::uint64_t bound,
                                    const EnumLimits& limits) {
  InjectivityResult res;
  std::vector<std::uint64_t> as = a.enumerate(bound, limits);
  if (as.empty()) return res;
  std::vector<std::uint64_t> bs = b.enumerate(bound / as.front(), limits);
  // (product, a, b), sorted: a collision across distinct pairs is adjacent.
  std::vector<std::array<std::uint64_t, 3>> prods;
  for (std::uint64_t x : as) {
    for (std::uint64_t y : bs) {
      if (x > bound / y) break;
      prods.push_back({x * y, x, y});
      if (prods.size() > limits.max_items) {
        throw CapacityError("injectivity_check pair count exceeds cap");
      }
    }
  }
  std::sort(prods.begin(), prods.end());
  for (std::size_t i = 0; i + 1 < prods.size(); ++i) {
    if (prods[i][0] == prods[i + 1][0]) {
      res.ok = false;
      res.a1 = prods[i][1];
      res.b1 = prods[i][2];
      res.a2 = prods[i + 1][1];
      res.b2 = prods[i + 1][2];
      return res;
    }
  }
  return res;
}

DisjointnessResult disjointness_check(const SetExpr& a, const SetExpr& b, std::uint64_t bound,
                                      const EnumLimits& limits) {
  DisjointnessResult res;
  std::vector<std::uint64_t> as = a.enumerate(bound, limits);
  std::vector<std::uint64_t> bs = b.enumerate(bound, limits);
  std::size_t i = 0, j = 0;
  while (i < as.size() && j < bs.size()) {
    if (as[i] == bs[j]) {
      res.ok = false;
      res.shared = as[i];
      return res;
    }
    if (as[i] < bs[j]) ++i; else ++j;
  }
  return res;
}

namespace {

// No pair may multiply two even factors, else signed sums do not factor.
bool sign_compatible_to(const SetExpr& a, const SetExpr& b, std::uint64_t bound,
                        const EnumLimits& limits) {
  bool a_has_even = false, b_has_even = false;
  for (std::uint64_t x : a.enumerate(bound, limits)) a_has_even |= (x % 2 == 0);
  for (std::uint64_t y : b.enumerate(bound, limits)) b_has_even |= (y % 2 == 0);
  return !(a_has_even && b_has_even);
}

}  // namespace

SetExpr checked_product(const SetExpr& left, const SetExpr& right, std::uint64_t bound,
                        const EnumLimits& limits) {
  InjectivityResult inj = injectivity_check(left, right, bound, limits);
  if (!inj.ok) {
    throw WitnessError("product injectivity failed: " + std::to_string(inj.a1) + "*" +
                       std::to_string(inj.b1) + " == " + std::to_string(inj.a2) + "*" +
                       std::to_string(inj.b2));
  }
  if (!sign_compatible_to(left, right, bound, limits)) {
    throw WitnessError("product sign compatibility failed: both factors contain even elements");
  }
  return SetExpr::product(left, right, ProductWitness{bound, true, true});
}

SetExpr checked_union(const SetExpr& left, const SetExpr& right, std::uint64_t bound,
                      const EnumLimits& limits) {
  DisjointnessResult dis = disjointness_check(left, right, bound, limits);
  if (!dis.ok) {
    throw WitnessError("union disjointness failed: shared element " + std::to_string(dis.shared));
  }
  return SetExpr::union_of(left, right, UnionWitness{bound, true});
}

namespace {

ordered_json expr_json(const SetExpr& e) {
  ordered_json j;
  switch (e.kind()) {
    case SetExpr::Kind::kEmpty:
      j["kind"] = "empty";
      break;
    case SetExpr::Kind::kFinite:
      j["kind"] = "finite";
      j["elems"] = e.finite_elems();
      break;
    case SetExpr::Kind::kGenerated: {
      const EDeltaSeq& s = e.generated_seq();
      j["kind"] = "generated";
      j["delta"] = s.delta();
      j["eps"] = s.eps();
      j["start"] = s.element(0);
      j["parity"] = s.parity() == Parity::kOdd ? "odd" : (s.parity() == Parity::kEven ? "even" : "mixed");
      j["source"] = s.describe();
      break;
    }
    case SetExpr::Kind::kProduct: {
      j["kind"] = "product";
      if (e.product_witness().has_value()) {
        j["witness"] = {{"checked_bound", e.product_witness()->checked_bound},
                        {"injective", e.product_witness()->injective},
                        {"sign_compatible", e.product_witness()->sign_compatible}};
      }
      j["left"] = expr_json(e.left());
      j["right"] = expr_json(e.right());
      break;
    }
    case SetExpr::Kind::kUnion: {
      j["kind"] = "union";
      if (e.union_witness().has_value()) {
        j["witness"] = {{"checked_bound", e.union_witness()->checked_bound},
                        {"disjoint", e.union_witness()->disjoint}};
      }
      j["left"] = expr_json(e.left());
      j["right"] = expr_json(e.right());
      break;
    }
  }
  return j;
}

}  // namespace

std::string SetExpr::to_json() const { return expr_json(*this).dump(); }

}  // namespace subsum
