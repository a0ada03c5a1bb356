#pragma once

// Flat "key = value" configuration files.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphcx/corpus.hpp"
#include "morphcx/error.hpp"

namespace morphcx {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto view = detail::trim(line);
      if (view.empty() || view.front() == '#') continue;
      const auto eq = view.find('=');
      if (eq == std::string_view::npos) throw ParseError("expected key = value", lineno);
      const auto key = detail::trim(view.substr(0, eq));
      if (key.empty()) throw ParseError("empty key", lineno);
      cfg.set(std::string(key), std::string(detail::trim(view.substr(eq + 1))));
    }
    return cfg;
  }

  static KeyValueConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config " + path.string());
    try {
      return parse(in);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }

  void set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }
  bool has(std::string_view key) const { return entries_.count(std::string(key)) != 0; }
  void erase(std::string_view key) { entries_.erase(std::string(key)); }
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  std::optional<std::string> get(std::string_view key) const {
    const auto it = entries_.find(std::string(key));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  std::string get_or(std::string_view key, std::string fallback) const {
    return get(key).value_or(std::move(fallback));
  }

  template <class T>
  T number(std::string_view key, T fallback) const {
    const auto v = get(key);
    return v ? parse_number<T>(key, *v) : fallback;
  }

  std::vector<double> doubles(std::string_view key, std::vector<double> fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (auto item : detail::split(*v, ',')) out.push_back(parse_number<double>(key, detail::trim(item)));
    return out;
  }

  std::vector<std::string> strings(std::string_view key) const {
    std::vector<std::string> out;
    if (const auto v = get(key)) {
      for (auto item : detail::split(*v, ',')) out.emplace_back(detail::trim(item));
    }
    return out;
  }

  /// One "key = value" line per entry, sorted by key.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
  }

  template <class T>
  static T parse_number(std::string_view key, std::string_view text) {
    T value{};
    if constexpr (std::is_floating_point_v<T>) {
      try {
        std::size_t used = 0;
        value = static_cast<T>(std::stod(std::string(text), &used));
        if (used != text.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("bad number for " + std::string(key) + ": '" + std::string(text) + "'");
      }
    } else {
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError("bad integer for " + std::string(key) + ": '" + std::string(text) + "'");
      }
    }
    return value;
  }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace morphcx
