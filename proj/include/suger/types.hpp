#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace suger {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (pair files, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Binary checkpoint problems: bad magic, version, truncation.
class FormatError : public Error {
 public:
  using Error::Error;
};

enum class EntityClass : std::uint8_t { kUser = 0, kBundle = 1, kItem = 2 };

std::string_view to_string(EntityClass c);

struct NodeRef {
  EntityClass entity_class;
  int id;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

// The six directed relations. Each relation feeds exactly one propagation
// part at its target node.
enum class Relation : std::uint8_t { kUB = 0, kBU, kUI, kIU, kBI, kIB };

inline constexpr int kNumRelations = 6;

inline constexpr std::array<Relation, kNumRelations> kAllRelations = {
    Relation::kUB, Relation::kBU, Relation::kUI, Relation::kIU, Relation::kBI, Relation::kIB};

constexpr EntityClass source_class(Relation r) {
  switch (r) {
    case Relation::kUB:
    case Relation::kUI:
      return EntityClass::kUser;
    case Relation::kBU:
    case Relation::kBI:
      return EntityClass::kBundle;
    case Relation::kIU:
    case Relation::kIB:
      return EntityClass::kItem;
  }
  return EntityClass::kUser;
}

constexpr EntityClass target_class(Relation r) {
  switch (r) {
    case Relation::kBU:
    case Relation::kIU:
      return EntityClass::kUser;
    case Relation::kUB:
    case Relation::kIB:
      return EntityClass::kBundle;
    case Relation::kUI:
    case Relation::kBI:
      return EntityClass::kItem;
  }
  return EntityClass::kUser;
}

constexpr Relation reverse(Relation r) {
  switch (r) {
    case Relation::kUB: return Relation::kBU;
    case Relation::kBU: return Relation::kUB;
    case Relation::kUI: return Relation::kIU;
    case Relation::kIU: return Relation::kUI;
    case Relation::kBI: return Relation::kIB;
    case Relation::kIB: return Relation::kBI;
  }
  return r;
}

constexpr int index_of(Relation r) { return static_cast<int>(r); }

std::string_view to_string(Relation r);

}  // namespace suger
