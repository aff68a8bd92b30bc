#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pshlab/certify.hpp"
#include "pshlab/classify.hpp"
#include "pshlab/gallery.hpp"

namespace pshlab {

// Insertion-ordered JSON with fixed number formatting (17 significant
// digits), so identical inputs serialize byte-identically.
class JsonValue {
 public:
  JsonValue() : kind_(Kind::Null) {}
  JsonValue(bool b) : kind_(Kind::Bool), bool_(b) {}
  JsonValue(int v) : kind_(Kind::Int), int_(v) {}
  JsonValue(long long v) : kind_(Kind::Int), int_(v) {}
  JsonValue(std::size_t v) : kind_(Kind::Int), int_(static_cast<long long>(v)) {}
  JsonValue(double v) : kind_(Kind::Double), double_(v) {}
  JsonValue(const char* s) : kind_(Kind::String), string_(s) {}
  JsonValue(std::string s) : kind_(Kind::String), string_(std::move(s)) {}

  static JsonValue object();
  static JsonValue array();

  JsonValue& set(const std::string& key, JsonValue v);
  JsonValue& push(JsonValue v);

  std::string dump(int indent = 2) const;

 private:
  enum class Kind { Null, Bool, Int, Double, String, Array, Object };
  void dump_to(std::string& out, int indent, int depth) const;

  Kind kind_;
  bool bool_ = false;
  long long int_ = 0;
  double double_ = 0;
  std::string string_;
  std::vector<JsonValue> items_;
  std::vector<std::pair<std::string, JsonValue>> members_;
};

inline constexpr const char* kReportSchema = "pshlab-report/1";

JsonValue json_of(const Point4& p);
JsonValue json_of(const Certificate& c);
JsonValue json_of(const TypeReport& r);
JsonValue json_of(const GalleryEntry& e);

// Witness table as CSV: x,y,u,v,value,what.
std::string witnesses_csv(const Certificate& c);

// Wraps a result in the versioned report envelope.
JsonValue make_report(const std::string& command, JsonValue config, JsonValue result);

}  // namespace pshlab
