#include "emorec/config.hpp"

#include "emorec/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace emorec {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T number(std::string_view text, std::string_view key, std::size_t line) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(Errc::Parse, "config line " + std::to_string(line) + ": bad value for " + std::string(key) + ": '" +
                                 std::string(text) + "'");
  }
  return value;
}

}  // namespace

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(Errc::InvalidArgument, "port must lie in [0, 65535]");
  if (!(mood_threshold > 0.0 && mood_threshold < 1.0)) {
    throw Error(Errc::InvalidArgument, "mood_threshold must lie in (0,1)");
  }
  weights.validate();
  if (!(blend_lambda >= 0.0 && blend_lambda <= 1.0)) throw Error(Errc::InvalidArgument, "blend_lambda must lie in [0,1]");
  if (session_idle_minutes < 1) throw Error(Errc::InvalidArgument, "session_idle_minutes must be >= 1");
}

ServiceConfig parse_config(std::string_view text) {
  ServiceConfig c;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::Parse, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "port") {
      c.port = number<int>(value, key, lineno);
    } else if (key == "mood_threshold") {
      c.mood_threshold = number<double>(value, key, lineno);
    } else if (key == "weights") {
      double w[3];
      std::string_view rest = value;
      for (int i = 0; i < 3; ++i) {
        const auto comma = rest.find(',');
        if ((i < 2) != (comma != std::string_view::npos)) {
          throw Error(Errc::Parse, "config line " + std::to_string(lineno) + ": weights needs three values");
        }
        w[i] = number<double>(trim(rest.substr(0, comma)), key, lineno);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
      c.weights = {w[0], w[1], w[2]};
    } else if (key == "blend_lambda") {
      c.blend_lambda = number<double>(value, key, lineno);
    } else if (key == "chain_path") {
      c.chain_path = value;
    } else if (key == "catalog_path") {
      c.catalog_path = value;
    } else if (key == "checkpoint_path") {
      c.checkpoint_path = value;
    } else if (key == "image_checkpoint_path") {
      c.image_checkpoint_path = value;
    } else if (key == "static_dir") {
      c.static_dir = value;
    } else if (key == "seed") {
      c.seed = number<std::uint64_t>(value, key, lineno);
    } else if (key == "session_idle_minutes") {
      c.session_idle_minutes = number<int>(value, key, lineno);
    } else {
      throw Error(Errc::Parse, "config line " + std::to_string(lineno) + ": unknown key '" + std::string(key) + "'");
    }
  }
  c.validate();
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto c = parse_config(ss.str());
  const auto base = path.parent_path();
  for (auto* p : {&c.chain_path, &c.catalog_path, &c.checkpoint_path, &c.image_checkpoint_path, &c.static_dir}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return c;
}

}  // namespace emorec
