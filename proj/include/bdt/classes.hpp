#pragma once

// Type classes and ground types for the diagram type system.
//
// A class set records which operations a type variable must support.
// Sets are kept closed under the fixed superclass relation below; the
// closure is applied once when a requirement is introduced, and unions
// of closed sets stay closed by construction.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace bdt {

enum class Ground : std::uint8_t { boolean, real, integer, unit };

inline const char* to_string(Ground g) {
  switch (g) {
    case Ground::boolean: return "bool";
    case Ground::real: return "real";
    case Ground::integer: return "int";
    case Ground::unit: return "unit";
  }
  return "?";
}

enum class ClassId : std::uint8_t {
  zero,
  numeral,
  plus,
  minus,
  uminus,
  power,
  ord,
  numeral_nzero,
  simulink,
};

inline constexpr int kClassCount = 9;

inline const char* to_string(ClassId c) {
  switch (c) {
    case ClassId::zero: return "zero";
    case ClassId::numeral: return "numeral";
    case ClassId::plus: return "plus";
    case ClassId::minus: return "minus";
    case ClassId::uminus: return "uminus";
    case ClassId::power: return "power";
    case ClassId::ord: return "ord";
    case ClassId::numeral_nzero: return "numeral_nzero";
    case ClassId::simulink: return "simulink";
  }
  return "?";
}

// Superclasses implied by each class. The listed sets are final: they are
// not chased transitively. numeral_nzero and simulink admit bool as an
// instance, so they must not drag in plus.
inline const std::vector<ClassId>& superclasses(ClassId c) {
  static const std::vector<ClassId> none{};
  static const std::vector<ClassId> of_numeral{ClassId::plus};
  static const std::vector<ClassId> of_nzero{ClassId::zero, ClassId::numeral};
  static const std::vector<ClassId> of_simulink{
      ClassId::zero,  ClassId::numeral, ClassId::minus,         ClassId::uminus,
      ClassId::power, ClassId::ord,     ClassId::numeral_nzero,
  };
  switch (c) {
    case ClassId::numeral: return of_numeral;
    case ClassId::numeral_nzero: return of_nzero;
    case ClassId::simulink: return of_simulink;
    default: return none;
  }
}

class ClassSet {
 public:
  ClassSet() = default;

  // Builds the closure of the given requirements.
  static ClassSet closure_of(std::initializer_list<ClassId> cs) {
    ClassSet s;
    for (ClassId c : cs) {
      s.bits_ |= bit(c);
      for (ClassId sup : superclasses(c)) s.bits_ |= bit(sup);
    }
    return s;
  }

  static ClassSet single(ClassId c) { return closure_of({c}); }

  // Builds exactly the given set, with no closure. Used for the instance
  // table, whose rows are definitive: bool instantiates numeral without
  // instantiating plus.
  static ClassSet exact(std::initializer_list<ClassId> cs) {
    ClassSet s;
    for (ClassId c : cs) s.bits_ |= bit(c);
    return s;
  }

  bool empty() const { return bits_ == 0; }
  bool contains(ClassId c) const { return (bits_ & bit(c)) != 0; }

  bool subset_of(const ClassSet& other) const {
    return (bits_ & ~other.bits_) == 0;
  }

  ClassSet union_with(const ClassSet& other) const {
    ClassSet s;
    s.bits_ = bits_ | other.bits_;
    return s;
  }

  bool operator==(const ClassSet& other) const = default;

  std::vector<ClassId> members() const {
    std::vector<ClassId> out;
    for (int i = 0; i < kClassCount; ++i)
      if (bits_ & (1u << i)) out.push_back(static_cast<ClassId>(i));
    return out;
  }

  // Members not implied by another member; used for display.
  std::vector<ClassId> generators() const {
    std::vector<ClassId> out;
    for (ClassId c : members()) {
      bool implied = false;
      for (ClassId d : members()) {
        if (d == c) continue;
        for (ClassId sup : superclasses(d))
          if (sup == c) implied = true;
      }
      if (!implied) out.push_back(c);
    }
    return out;
  }

  // Display form: generators in alphabetical order, e.g. "{numeral,zero}".
  std::string display() const;

 private:
  static std::uint16_t bit(ClassId c) {
    return static_cast<std::uint16_t>(1u << static_cast<int>(c));
  }
  std::uint16_t bits_ = 0;
};

// Ground instances of each class. bool instantiates everything except
// plus: being a simulink instance carries the minus/uminus/power/ord
// obligations (their boolean operations exist but stay uninterpreted,
// so nothing simplifies at bool), while plus is deliberately withheld
// so that a default-mode Add rejects boolean inputs. int supports
// everything except the simulink class; unit supports nothing.
inline const ClassSet& instances_of(Ground g) {
  static const ClassSet of_bool = ClassSet::exact({
      ClassId::zero, ClassId::numeral, ClassId::minus, ClassId::uminus,
      ClassId::power, ClassId::ord, ClassId::numeral_nzero,
      ClassId::simulink});
  static const ClassSet of_real = ClassSet::exact({
      ClassId::zero, ClassId::numeral, ClassId::plus, ClassId::minus,
      ClassId::uminus, ClassId::power, ClassId::ord, ClassId::numeral_nzero,
      ClassId::simulink});
  static const ClassSet of_int = ClassSet::exact({
      ClassId::zero, ClassId::numeral, ClassId::plus, ClassId::minus,
      ClassId::uminus, ClassId::power, ClassId::ord, ClassId::numeral_nzero});
  static const ClassSet of_unit{};
  switch (g) {
    case Ground::boolean: return of_bool;
    case Ground::real: return of_real;
    case Ground::integer: return of_int;
    case Ground::unit: return of_unit;
  }
  return of_unit;
}

inline std::string ClassSet::display() const {
  std::vector<std::string> names;
  for (ClassId c : generators()) names.emplace_back(to_string(c));
  std::sort(names.begin(), names.end());
  if (names.empty()) return "{}";
  if (names.size() == 1) return names[0];
  std::string out = "{";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ",";
    out += names[i];
  }
  out += "}";
  return out;
}

}  // namespace bdt
