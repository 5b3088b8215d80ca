#pragma once

// Constraint-class algebra: the four binary axes, the nine valid leaf
// classes, 4-letter codes with wildcard patterns, and the canonical leaf
// ordering used everywhere in reports and the problem DSL.

#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qrak {

enum class Quantifiability : std::uint8_t { Quantifiable, Nonquantifiable };
enum class Relaxability : std::uint8_t { Relaxable, Unrelaxable };
enum class Availability : std::uint8_t { APriori, Simulation };
enum class Knowledge : std::uint8_t { Known, Hidden };

// Refinement of the Q side: which of the two measures a quantifiable
// constraint actually provides.
enum class QuantifiableDetail : std::uint8_t { Fully, FeasibilityOnly, ViolationOnly };

inline char axis_letter(Quantifiability v) { return v == Quantifiability::Quantifiable ? 'Q' : 'N'; }
inline char axis_letter(Relaxability v) { return v == Relaxability::Relaxable ? 'R' : 'U'; }
inline char axis_letter(Availability v) { return v == Availability::APriori ? 'A' : 'S'; }
inline char axis_letter(Knowledge v) { return v == Knowledge::Known ? 'K' : 'H'; }

/// One of the nine valid constraint classes. Hidden classes exist only as
/// NUSH; the other seven H combinations cannot be constructed. Equality and
/// ordering ignore the detail refinement: two classes are the same leaf.
class ConstraintClass {
 public:
  static std::optional<ConstraintClass> make(Quantifiability q, Relaxability r,
                                             Availability a, Knowledge k) {
    if (k == Knowledge::Hidden &&
        (q != Quantifiability::Nonquantifiable || r != Relaxability::Unrelaxable ||
         a != Availability::Simulation)) {
      return std::nullopt;
    }
    return ConstraintClass(q, r, a, k);
  }

  Quantifiability quantifiability() const { return q_; }
  Relaxability relaxability() const { return r_; }
  Availability availability() const { return a_; }
  Knowledge knowledge() const { return k_; }

  bool quantifiable() const { return q_ == Quantifiability::Quantifiable; }
  bool relaxable() const { return r_ == Relaxability::Relaxable; }
  bool simulation_based() const { return a_ == Availability::Simulation; }
  bool a_priori() const { return a_ == Availability::APriori; }
  bool hidden() const { return k_ == Knowledge::Hidden; }

  // Engaged only for quantifiable classes; defaults to Fully.
  std::optional<QuantifiableDetail> detail() const {
    if (!quantifiable()) return std::nullopt;
    return detail_;
  }

  ConstraintClass with_detail(QuantifiableDetail d) const {
    ConstraintClass c = *this;
    if (c.quantifiable()) c.detail_ = d;
    return c;
  }

  /// Position 1..9 in the canonical left-to-right leaf ordering; grows with
  /// the general difficulty of the class.
  int leaf_index() const {
    if (hidden()) return 9;
    int i = 1;
    if (q_ == Quantifiability::Nonquantifiable) i += 1;
    if (r_ == Relaxability::Unrelaxable) i += 2;
    if (a_ == Availability::Simulation) i += 4;
    return i;
  }

  std::string code() const {
    return std::string{axis_letter(q_), axis_letter(r_), axis_letter(a_), axis_letter(k_)};
  }

  friend bool operator==(const ConstraintClass& x, const ConstraintClass& y) {
    return x.q_ == y.q_ && x.r_ == y.r_ && x.a_ == y.a_ && x.k_ == y.k_;
  }
  friend bool operator!=(const ConstraintClass& x, const ConstraintClass& y) { return !(x == y); }
  friend bool operator<(const ConstraintClass& x, const ConstraintClass& y) {
    return x.leaf_index() < y.leaf_index();
  }

 private:
  ConstraintClass(Quantifiability q, Relaxability r, Availability a, Knowledge k)
      : q_(q), r_(r), a_(a), k_(k),
        detail_(QuantifiableDetail::Fully) {}

  Quantifiability q_;
  Relaxability r_;
  Availability a_;
  Knowledge k_;
  QuantifiableDetail detail_;
};

inline std::optional<ConstraintClass> make_class(Quantifiability q, Relaxability r,
                                                 Availability a, Knowledge k) {
  return ConstraintClass::make(q, r, a, k);
}

inline std::string format_class(const ConstraintClass& c) { return c.code(); }
inline int leaf_index(const ConstraintClass& c) { return c.leaf_index(); }

/// The nine classes in canonical leaf order.
inline const std::array<ConstraintClass, 9>& enumerate_classes() {
  static const std::array<ConstraintClass, 9> classes = [] {
    std::array<std::optional<ConstraintClass>, 9> slots;
    for (auto q : {Quantifiability::Quantifiable, Quantifiability::Nonquantifiable})
      for (auto r : {Relaxability::Relaxable, Relaxability::Unrelaxable})
        for (auto a : {Availability::APriori, Availability::Simulation})
          for (auto k : {Knowledge::Known, Knowledge::Hidden})
            if (auto c = ConstraintClass::make(q, r, a, k)) slots[c->leaf_index() - 1] = *c;
    std::array<ConstraintClass, 9> out = {*slots[0], *slots[1], *slots[2], *slots[3], *slots[4],
                                          *slots[5], *slots[6], *slots[7], *slots[8]};
    return out;
  }();
  return classes;
}

/// A 4-slot class code with wildcards. A fixed fourth slot of H never
/// survives parsing (it collapses to the concrete NUSH class), so a pattern's
/// knowledge slot is either K or a wildcard.
class ClassPattern {
 public:
  std::optional<Quantifiability> q;
  std::optional<Relaxability> r;
  std::optional<Availability> a;
  std::optional<Knowledge> k;

  bool matches(const ConstraintClass& c) const {
    if (q && *q != c.quantifiability()) return false;
    if (r && *r != c.relaxability()) return false;
    if (a && *a != c.availability()) return false;
    if (k && *k != c.knowledge()) return false;
    return true;
  }

  std::string code() const {
    auto ch = [](auto slot) { return slot ? axis_letter(*slot) : '*'; };
    return std::string{ch(q), ch(r), ch(a), ch(k)};
  }

  // A wildcard in the fourth slot matches every K leaf plus NUSH; callers
  // surface this in validation output since the mix is rarely intended.
  bool knowledge_wildcard() const { return !k.has_value(); }

  std::vector<ConstraintClass> matching_classes() const {
    std::vector<ConstraintClass> out;
    for (const auto& c : enumerate_classes())
      if (matches(c)) out.push_back(c);
    return out;
  }
};

inline bool matches(const ClassPattern& p, const ConstraintClass& c) { return p.matches(c); }

struct ClassCodeError {
  enum class Kind { Syntax, InvalidHiddenCombination };
  Kind kind;
  std::string message;
  int position = 0;  // 1-based column inside the code, 0 when not positional
};

using ParsedClassCode = std::variant<ConstraintClass, ClassPattern, ClassCodeError>;

/// Parses a 4-letter class code, a wildcard pattern, or one of the two
/// accepted abbreviations: "S" for **S* and "H" for NUSH. Case-insensitive.
/// Patterns that force the hidden leaf collapse to the NUSH class; a fixed
/// letter contradicting the hidden rule is rejected rather than matching
/// nothing.
inline ParsedClassCode parse_class_code(std::string_view text) {
  std::string u;
  u.reserve(text.size());
  for (char ch : text) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));

  if (u == "S") {
    ClassPattern p;
    p.a = Availability::Simulation;
    return p;
  }
  if (u == "H") return *ConstraintClass::make(Quantifiability::Nonquantifiable,
                                              Relaxability::Unrelaxable,
                                              Availability::Simulation, Knowledge::Hidden);
  if (u.size() != 4) {
    return ClassCodeError{ClassCodeError::Kind::Syntax,
                          "class code must be 4 letters (or the abbreviations S, H)", 0};
  }

  ClassPattern p;
  for (int i = 0; i < 4; ++i) {
    const char ch = u[static_cast<std::size_t>(i)];
    if (ch == '*') continue;
    bool ok = true;
    switch (i) {
      case 0:
        if (ch == 'Q') p.q = Quantifiability::Quantifiable;
        else if (ch == 'N') p.q = Quantifiability::Nonquantifiable;
        else ok = false;
        break;
      case 1:
        if (ch == 'R') p.r = Relaxability::Relaxable;
        else if (ch == 'U') p.r = Relaxability::Unrelaxable;
        else ok = false;
        break;
      case 2:
        if (ch == 'A') p.a = Availability::APriori;
        else if (ch == 'S') p.a = Availability::Simulation;
        else ok = false;
        break;
      case 3:
        if (ch == 'K') p.k = Knowledge::Known;
        else if (ch == 'H') p.k = Knowledge::Hidden;
        else ok = false;
        break;
    }
    if (!ok) {
      return ClassCodeError{ClassCodeError::Kind::Syntax,
                            std::string("invalid letter '") + ch + "' in position " +
                                std::to_string(i + 1),
                            i + 1};
    }
  }

  if (p.k && *p.k == Knowledge::Hidden) {
    // The hidden branch has a single leaf; every other slot must agree.
    if ((p.q && *p.q != Quantifiability::Nonquantifiable) ||
        (p.r && *p.r != Relaxability::Unrelaxable) ||
        (p.a && *p.a != Availability::Simulation)) {
      return ClassCodeError{ClassCodeError::Kind::InvalidHiddenCombination,
                            "hidden constraints are exactly NUSH; '" + u +
                                "' fixes an incompatible axis",
                            0};
    }
    return *ConstraintClass::make(Quantifiability::Nonquantifiable, Relaxability::Unrelaxable,
                                  Availability::Simulation, Knowledge::Hidden);
  }

  if (p.q && p.r && p.a && p.k) {
    auto c = ConstraintClass::make(*p.q, *p.r, *p.a, *p.k);
    if (!c) {
      return ClassCodeError{ClassCodeError::Kind::InvalidHiddenCombination,
                            "'" + u + "' is not one of the nine valid classes", 0};
    }
    return *c;
  }
  return p;
}

/// Convenience for code written against known-good literals; returns the
/// class for an exact valid code and aborts the program otherwise.
inline ConstraintClass class_from_code(std::string_view code) {
  auto parsed = parse_class_code(code);
  return std::get<ConstraintClass>(parsed);
}

}  // namespace qrak
