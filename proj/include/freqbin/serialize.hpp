#pragma once

// JSON forms of the configuration and result types. Object keys are emitted
// in sorted order; non-finite numbers are written as the strings "inf",
// "-inf" and "nan".

#include <json.hpp>
#include <set>
#include <string>

#include "freqbin/counting.hpp"
#include "freqbin/errors.hpp"
#include "freqbin/experiments.hpp"

namespace freqbin {

using Json = nlohmann::json;

Json number_to_json(double v);
/// Accepts numbers and the strings "inf"/"-inf"; throws ParseError at `pointer`.
double number_from_json(const Json& j, const std::string& pointer);

inline std::string child(const std::string& pointer, const std::string& key) {
  return pointer + "/" + key;
}

/// Reads known keys of one JSON object; finish() rejects the rest.
class JsonObjectReader {
 public:
  JsonObjectReader(const Json& j, std::string pointer) : j_(j), pointer_(std::move(pointer)) {
    if (!j_.is_object()) throw ParseError(pointer_, "expected an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const Json* v = find(key)) out = number_from_json(*v, child(pointer_, key));
  }

  void boolean(const std::string& key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) throw ParseError(child(pointer_, key), "expected a boolean");
      out = v->get<bool>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_integer()) throw ParseError(child(pointer_, key), "expected an integer");
      out = v->get<int>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) throw ParseError(child(pointer_, key), "expected a string");
      out = v->get<std::string>();
    }
  }

  const std::string& pointer() const { return pointer_; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ParseError(child(pointer_, item.key()), "unknown key");
    }
  }

 private:
  const Json& j_;
  std::string pointer_;
  std::set<std::string> seen_;
};

Json to_json(const BinGrid& grid);
Json to_json(const FilterParams& f);
Json to_json(const DRParams& p);
Json to_json(const DriveSpec& d);
Json to_json(const DrStage& s);
Json to_json(const DetectorSpec& d);
Json to_json(const ChipConfig& cfg);
Json to_json(const Imperfections& imp);
Json to_json(const CountRecord& rec);
Json to_json(const MetricResult& m);
Json to_json(const TruthTable& t);
Json to_json(const ExperimentResult& r);

/// Strict readers: unknown keys and wrong types raise ParseError carrying a
/// JSON-pointer path rooted at `pointer`. Missing keys keep the value already
/// in `out`, so these apply overrides on top of defaults.
void read_json(const Json& j, const std::string& pointer, ChipConfig& out);
void read_json(const Json& j, const std::string& pointer, Imperfections& out);

/// Canonical text of a result (two-space indent, trailing newline).
std::string dump_result(const ExperimentResult& r);

}  // namespace freqbin
