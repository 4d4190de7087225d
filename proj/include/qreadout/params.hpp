#ifndef QREADOUT_PARAMS_HPP
#define QREADOUT_PARAMS_HPP

// Strict reading of scenario parameter objects.

#include <set>
#include <string>
#include <vector>

#include "qreadout/causality.hpp"
#include "qreadout/error.hpp"
#include "qreadout/readout.hpp"
#include "qreadout/report.hpp"

namespace qreadout {

//! Reads typed values from a JSON object, filling in defaults, and records
//! the effective parameter set. finish() rejects keys nobody asked for.
class ParamReader {
 public:
  explicit ParamReader(const Json& source) : source_(source.is_null() ? Json::object() : source) {
    if (!source_.is_object()) throw ParameterError("parameters must be a JSON object");
  }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    used_.insert(key);
    T value = fallback;
    if (auto it = source_.find(key); it != source_.end()) {
      try {
        value = it->template get<T>();
      } catch (const nlohmann::json::exception&) {
        throw ParameterError("parameter '" + key + "' has the wrong type");
      }
    }
    effective_[key] = value;
    return value;
  }

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    double value = fallback;
    if (auto it = source_.find(key); it != source_.end()) {
      if (!it->is_number()) throw ParameterError("parameter '" + key + "' must be a number");
      value = it->get<double>();
    }
    if (!std::isfinite(value)) throw ParameterError("parameter '" + key + "' must be finite");
    effective_[key] = value;
    return value;
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) {
    used_.insert(key);
    Vec3 value = fallback;
    if (auto it = source_.find(key); it != source_.end()) {
      if (!it->is_array() || it->size() != 3) throw ParameterError("parameter '" + key + "' must be [x, y, z]");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!(*it)[i].is_number()) throw ParameterError("parameter '" + key + "' must hold numbers");
        value(static_cast<Eigen::Index>(i)) = (*it)[i].get<double>();
      }
    }
    if (!value.allFinite()) throw ParameterError("parameter '" + key + "' must be finite");
    effective_[key] = Json::array({value.x(), value.y(), value.z()});
    return value;
  }

  //! "inf" for exact readout, or a positive rounding step.
  PrecisionModel precision(const std::string& key = "precision") {
    used_.insert(key);
    Json raw = "inf";
    if (auto it = source_.find(key); it != source_.end()) raw = *it;
    effective_[key] = raw;
    return parse_precision(raw);
  }

  static PrecisionModel parse_precision(const Json& raw) {
    if (raw.is_string() && raw.get<std::string>() == "inf") return PrecisionModel::infinite();
    if (raw.is_number()) {
      const double eps = raw.get<double>();
      if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("precision must be positive or \"inf\"");
      return PrecisionModel::rounded(eps);
    }
    throw ParameterError("precision must be a positive number or \"inf\"");
  }

  const Json& raw(const std::string& key) const { return source_.at(key); }
  bool has(const std::string& key) const { return source_.contains(key); }
  void mark(const std::string& key, Json effective) {
    used_.insert(key);
    effective_[key] = std::move(effective);
  }

  void require(bool ok, const std::string& message) const {
    if (!ok) throw ParameterError(message);
  }

  //! Effective parameters; throws on any key that was never read.
  Json finish() const {
    for (const auto& [key, value] : source_.items())
      if (!used_.count(key)) throw ParameterError("unknown parameter '" + key + "'");
    return effective_;
  }

 private:
  Json source_;
  std::set<std::string> used_;
  Json effective_ = Json::object();
};

}  // namespace qreadout

#endif  // QREADOUT_PARAMS_HPP
