// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "magkit/error.hpp"
#include "magkit/io.hpp"

namespace magkit::fetch {

/// Lowercase hex SHA-256 of a byte string.
inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::data, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Raised by a downloader when the network is unreachable.
class OfflineError : public Error {
 public:
  explicit OfflineError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class ChecksumError : public InputError {
 public:
  using InputError::InputError;
};

struct DatasetEntry {
  std::string name;
  std::string filename;
  /// Download location; must be HTTPS.
  std::string url;
  /// Expected lowercase hex SHA-256. Fetching refuses unpinned entries.
  std::string sha256;

  bool pinned() const { return !url.empty() && !sha256.empty(); }
};

/// Known ODDS benchmark names. Locations and digests are not shipped with
/// the library; they are pinned through a manifest (see load_manifest).
inline std::vector<DatasetEntry> default_catalog() {
  std::vector<DatasetEntry> out;
  for (const char* name : {"breastw", "cardio", "glass", "http", "ionosphere", "lympho",
                           "pendigits", "pima", "shuttle", "vowels", "wbc", "wine"}) {
    out.push_back({name, std::string(name) + ".mat", "", ""});
  }
  return out;
}

/// Merges a JSON manifest of the form
///   {"schema": 1, "datasets": {"breastw": {"url": "...", "sha256": "...",
///                                          "filename": "breastw.mat"}}}
/// into the catalog. Entries for new names are added.
inline void load_manifest(std::vector<DatasetEntry>& catalog,
                          const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.contains("datasets") || !doc["datasets"].is_object()) {
    throw InputError("manifest lacks a 'datasets' object");
  }
  for (const auto& [name, entry] : doc["datasets"].items()) {
    auto it = std::find_if(catalog.begin(), catalog.end(),
                           [&](const DatasetEntry& e) { return e.name == name; });
    if (it == catalog.end()) {
      catalog.push_back({name, name + ".mat", "", ""});
      it = catalog.end() - 1;
    }
    it->url = entry.value("url", it->url);
    it->sha256 = entry.value("sha256", it->sha256);
    it->filename = entry.value("filename", it->filename);
    std::transform(it->sha256.begin(), it->sha256.end(), it->sha256.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
}

/// Fetches url and returns the body; throws OfflineError when unreachable.
using Downloader = std::function<std::string(const std::string& url)>;

struct FetchResult {
  std::filesystem::path path;
  bool downloaded = false;
  /// True when the fetch was not attempted (network not enabled or offline).
  bool skipped = false;
  std::string message;
};

/// Ensures dir/<filename> holds the pinned dataset. A cached file with the
/// right digest is reused without touching the network; a corrupt one is
/// deleted and fetched again.
inline FetchResult fetch_dataset(const std::string& name, const std::filesystem::path& dir,
                                 const std::vector<DatasetEntry>& catalog,
                                 bool allow_network, const Downloader& download) {
  const auto it = std::find_if(catalog.begin(), catalog.end(),
                               [&](const DatasetEntry& e) { return e.name == name; });
  if (it == catalog.end()) {
    std::string names;
    for (const auto& e : catalog) names += (names.empty() ? "" : ", ") + e.name;
    throw InputError("unknown dataset '" + name + "'; supported: " + names);
  }
  if (!it->pinned()) {
    throw InputError("dataset '" + name +
                     "' has no pinned url/sha256; supply them with --manifest");
  }
  if (it->url.rfind("https://", 0) != 0) {
    throw InputError("dataset '" + name + "' url must use https");
  }

  FetchResult result;
  result.path = dir / it->filename;
  if (std::filesystem::exists(result.path)) {
    if (sha256_hex(read_file(result.path)) == it->sha256) {
      result.message = "cached copy verified";
      return result;
    }
    std::filesystem::remove(result.path);
  }
  if (!allow_network) {
    result.skipped = true;
    result.message = "network access not enabled; rerun with --allow-network";
    return result;
  }
  std::string body;
  try {
    body = download(it->url);
  } catch (const OfflineError& e) {
    result.skipped = true;
    result.message = std::string("offline, skipped: ") + e.what();
    return result;
  }
  const std::string digest = sha256_hex(body);
  if (digest != it->sha256) {
    throw ChecksumError("checksum mismatch for '" + name + "': expected " + it->sha256 +
                        ", got " + digest);
  }
  std::filesystem::create_directories(dir);
  io::write_atomic(result.path, body);
  result.downloaded = true;
  result.message = "downloaded and verified";
  return result;
}

}  // namespace magkit::fetch
