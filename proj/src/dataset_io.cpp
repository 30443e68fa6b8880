#include "twinbeam/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

namespace twinbeam {

using nlohmann::json;

namespace {

json detector_to_json(const DetectorParams& d) {
  return {{"efficiency", d.efficiency}, {"noise_mean", d.noise_mean}, {"noise_var", d.noise_var}};
}

DetectorParams detector_from_json(const json& j) {
  DetectorParams d;
  d.efficiency = j.at("efficiency").get<double>();
  d.noise_mean = j.at("noise_mean").get<double>();
  d.noise_var = j.at("noise_var").get<double>();
  return d;
}

json source_to_json(const SourceParams& s) {
  return {{"n_mean_per_mode", s.n_mean_per_mode},
          {"matched_modes", s.matched_modes},
          {"unmatched_modes_1", s.unmatched_modes_1},
          {"unmatched_modes_2", s.unmatched_modes_2},
          {"gain_jitter_rel_std", s.gain_jitter_rel_std}};
}

SourceParams source_from_json(const json& j) {
  SourceParams s;
  s.n_mean_per_mode = j.at("n_mean_per_mode").get<double>();
  s.matched_modes = j.at("matched_modes").get<std::int64_t>();
  s.unmatched_modes_1 = j.at("unmatched_modes_1").get<std::int64_t>();
  s.unmatched_modes_2 = j.at("unmatched_modes_2").get<std::int64_t>();
  s.gain_jitter_rel_std = j.at("gain_jitter_rel_std").get<double>();
  return s;
}

std::string_view next_line(std::string_view& rest) {
  const std::size_t pos = rest.find('\n');
  if (pos == std::string_view::npos) {
    std::string_view line = rest;
    rest = {};
    return line;
  }
  std::string_view line = rest.substr(0, pos);
  rest.remove_prefix(pos + 1);
  return line;
}

double parse_double(std::string_view s, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(std::string("bad ") + what + " value '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_int(std::string_view s, const char* what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(std::string("bad ") + what + " value '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(std::string("bad ") + what + " value '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw IoError("failed to format a double");
  return std::string(buf, ptr);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string serialize_dataset(const Dataset& ds) {
  std::string body;
  body.reserve(40 * ds.records.size() + 512);

  body += kDatasetMagic;
  body += " v";
  body += std::to_string(kDatasetVersion);
  body += "; kind=";
  body += to_string(ds.kind);
  body += "; seed=";
  body += std::to_string(ds.seed);
  body += "; n=";
  body += std::to_string(ds.records.size());
  body += '\n';

  json meta;
  meta["kind"] = to_string(ds.kind);
  meta["seed"] = ds.seed;
  meta["n_pulses"] = ds.records.size();
  meta["source"] = ds.source ? source_to_json(*ds.source) : json(nullptr);
  meta["coherent"] = ds.coherent
                         ? json{{"mean1", ds.coherent->mean1}, {"mean2", ds.coherent->mean2}}
                         : json(nullptr);
  meta["detectors"] = json::array({detector_to_json(ds.detector1), detector_to_json(ds.detector2)});
  meta["clamped_pulses"] = ds.clamped_pulses;
  meta["tool_version"] = kToolVersion;
  body += meta.dump();
  body += '\n';

  body += "pulse_id,s1,s2\n";
  for (const PulseRecord& r : ds.records) {
    body += std::to_string(r.pulse_id);
    body += ',';
    body += format_double(r.s1);
    body += ',';
    body += format_double(r.s2);
    body += '\n';
  }

  body += "# sha256=";
  body += sha256_hex(body);
  body += '\n';
  return body;
}

Dataset parse_dataset(std::string_view text) {
  std::string_view rest = text;

  const std::string_view header = next_line(rest);
  if (!header.starts_with(kDatasetMagic))
    throw IoError("not a twinbeam dataset file (missing magic header)");
  std::string_view h = header.substr(std::string_view(kDatasetMagic).size());
  if (!h.starts_with(" v"))
    throw IoError("malformed dataset header");
  h.remove_prefix(2);
  const std::size_t semi = h.find(';');
  if (semi == std::string_view::npos) throw IoError("malformed dataset header");
  const std::int64_t version = parse_int(h.substr(0, semi), "format version");
  if (version != kDatasetVersion)
    throw IoError("unsupported dataset format version v" + std::to_string(version) +
                  " (expected v" + std::to_string(kDatasetVersion) + ")");

  const std::string_view meta_line = next_line(rest);
  json meta;
  try {
    meta = json::parse(meta_line);
  } catch (const json::exception& e) {
    throw IoError(std::string("bad dataset metadata: ") + e.what());
  }

  const std::string_view columns = next_line(rest);
  if (columns != "pulse_id,s1,s2")
    throw IoError("unexpected dataset column header '" + std::string(columns) + "'");

  Dataset ds;
  std::size_t n_expected = 0;
  try {
    ds.kind = dataset_kind_from_string(meta.at("kind").get<std::string>());
    ds.seed = meta.at("seed").get<std::uint64_t>();
    n_expected = meta.at("n_pulses").get<std::size_t>();
    if (!meta.at("source").is_null()) ds.source = source_from_json(meta.at("source"));
    if (!meta.at("coherent").is_null())
      ds.coherent = CoherentParams{meta.at("coherent").at("mean1").get<double>(),
                                   meta.at("coherent").at("mean2").get<double>()};
    ds.detector1 = detector_from_json(meta.at("detectors").at(0));
    ds.detector2 = detector_from_json(meta.at("detectors").at(1));
    ds.clamped_pulses = meta.at("clamped_pulses").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw IoError(std::string("incomplete dataset metadata: ") + e.what());
  }

  ds.records.reserve(n_expected);
  while (true) {
    if (rest.empty()) throw IoError("truncated dataset file (checksum line missing)");
    if (rest.starts_with("# sha256=")) break;
    const std::string_view line = next_line(rest);
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos)
      throw IoError("malformed dataset row '" + std::string(line) + "'");
    PulseRecord r;
    try {
      r.pulse_id = parse_int(line.substr(0, c1), "pulse_id");
      r.s1 = parse_double(line.substr(c1 + 1, c2 - c1 - 1), "s1");
      r.s2 = parse_double(line.substr(c2 + 1), "s2");
    } catch (const ParseError& e) {
      throw IoError(e.what());
    }
    ds.records.push_back(r);
  }

  if (ds.records.size() != n_expected)
    throw IoError("truncated dataset file: expected " + std::to_string(n_expected) +
                  " records, found " + std::to_string(ds.records.size()));

  // Everything before the checksum line participates in the checksum.
  const std::size_t body_size = static_cast<std::size_t>(rest.data() - text.data());
  const std::string_view checksum_line = next_line(rest);
  const std::string_view stored = checksum_line.substr(std::string_view("# sha256=").size());
  const std::string actual = sha256_hex(text.substr(0, body_size));
  if (stored != actual)
    throw IoError("dataset checksum mismatch (file corrupted?)");
  if (!rest.empty())
    throw IoError("unexpected trailing content after the checksum line");

  return ds;
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() +
                        "': " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return content;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  atomic_write_file(path, serialize_dataset(ds));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

}  // namespace twinbeam
