#include "vfl/cli/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "vfl/errors.hpp"
#include "vfl/mklha.hpp"
#include "vfl/parallel.hpp"

namespace vfl::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigurationError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
}

}  // namespace

Bytes SessionFile::session_tag() const {
  ByteWriter w;
  w.raw(as_bytes("vfl-session-tag"));
  w.raw(seed_bytes());
  const Digest d = sha256(w.bytes());
  return Bytes(d.begin(), d.begin() + 16);
}

protocol::SessionConfig SessionFile::to_session(std::size_t workers) const {
  if (curve != mklha::kCurveName) throw ConfigurationError("unsupported curve '" + curve + "'");
  if (clients == 0) throw ConfigurationError("clients must be at least 1");
  protocol::SessionConfig cfg;
  cfg.d = d;
  cfg.m = m;
  cfg.precision = Precision(dp);
  cfg.bounds = {max_abs, static_cast<std::uint32_t>(clients)};
  for (std::size_t k = 1; k <= clients; ++k) cfg.active.push_back(Identity{k});
  cfg.session_tag = session_tag();
  cfg.subcolumns = subcolumns;
  cfg.workers = workers;
  cfg.validate();
  return cfg;
}

void write_session_file(const std::filesystem::path& path, const SessionFile& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  std::ostringstream max_abs;
  max_abs.precision(17);
  max_abs << cfg.max_abs;
  out << "# vfl session\n"
      << "d = " << cfg.d << '\n'
      << "m = " << cfg.m << '\n'
      << "dp = " << cfg.dp << '\n'
      << "clients = " << cfg.clients << '\n'
      << "subcolumns = " << cfg.subcolumns << '\n'
      << "seed = " << cfg.seed << '\n'
      << "curve = " << cfg.curve << '\n'
      << "max_abs = " << max_abs.str() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

SessionFile read_session_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  SessionFile cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigurationError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "d") {
      cfg.d = parse_size(key, value);
    } else if (key == "m") {
      cfg.m = parse_size(key, value);
    } else if (key == "dp") {
      cfg.dp = static_cast<int>(parse_size(key, value));
    } else if (key == "clients") {
      cfg.clients = parse_size(key, value);
    } else if (key == "subcolumns") {
      cfg.subcolumns = parse_size(key, value);
    } else if (key == "seed") {
      (void)seed_from_hex(value);
      cfg.seed = value;
    } else if (key == "curve") {
      cfg.curve = value;
    } else if (key == "max_abs") {
      try {
        cfg.max_abs = std::stod(value);
      } catch (const std::exception&) {
        throw ConfigurationError("config key 'max_abs': expected a number");
      }
    } else {
      throw ConfigurationError(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

std::size_t resolve_threads(std::size_t flag) { return flag > 0 ? flag : default_worker_count(); }

}  // namespace vfl::cli
