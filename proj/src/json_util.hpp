#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include "dca/error.hpp"
#include "json.hpp"

namespace dca::detail {

using json = nlohmann::json;

inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(Errc::config, std::string(what) + ": " + e.what());
  }
}

// Rejects keys outside `allowed`.
inline void check_keys(const json &obj, std::initializer_list<std::string_view> allowed,
                       std::string_view where) {
  if (!obj.is_object()) throw Error(Errc::config, std::string(where) + " must be an object");
  for (const auto &item : obj.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) {
      throw Error(Errc::config,
                  "unknown key '" + item.key() + "' in " + std::string(where));
    }
  }
}

// nlohmann wraps negative integers into unsigned targets; refuse instead.
template <class T>
T convert(const json &v, const char *key, std::string_view where) {
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!v.is_number_unsigned()) {
      throw Error(Errc::config,
                  std::string(where) + "." + key + ": expected a non-negative integer");
    }
  }
  try {
    return v.get<T>();
  } catch (const json::exception &e) {
    throw Error(Errc::config, std::string(where) + "." + key + ": " + e.what());
  }
}

template <class T>
T get_or(const json &obj, const char *key, T fallback, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return convert<T>(*it, key, where);
}

template <class T>
T require(const json &obj, const char *key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(Errc::config, std::string(where) + " is missing '" + key + "'");
  }
  return convert<T>(*it, key, where);
}

}  // namespace dca::detail
