// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <zlib.h>

#include <Eigen/Dense>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "magkit/error.hpp"
#include "magkit/metric.hpp"

namespace magkit::io {

/// Minimal reader for little-endian MATLAB level-5 files: numeric 2-D
/// arrays, optionally zlib-compressed. Every supported numeric class is
/// converted to double. Cell, struct, sparse and complex arrays are skipped.
class MatFileReader {
 public:
  static std::map<std::string, Matrix> parse(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 128) throw InputError("MAT file is truncated");
    if (bytes[126] != 'I' || bytes[127] != 'M') {
      if (std::memcmp(bytes.data(), "\x89HDF", 4) == 0 ||
          (bytes.size() > 516 && std::memcmp(bytes.data() + 512, "\x89HDF", 4) == 0)) {
        throw InputError("MAT v7.3 (HDF5) files are not supported; convert to CSV");
      }
      throw InputError("not a little-endian level-5 MAT file");
    }
    const unsigned version = bytes[124] | (static_cast<unsigned>(bytes[125]) << 8);
    if (version == 0x0200) {
      throw InputError("MAT v7.3 (HDF5) files are not supported; convert to CSV");
    }
    if (version != 0x0100) throw InputError("unsupported MAT file version");
    std::map<std::string, Matrix> out;
    parse_elements(bytes.data() + 128, bytes.size() - 128, out);
    return out;
  }

  static std::map<std::string, Matrix> read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse(bytes);
  }

 private:
  enum : std::uint32_t {
    mi_int8 = 1, mi_uint8 = 2, mi_int16 = 3, mi_uint16 = 4, mi_int32 = 5,
    mi_uint32 = 6, mi_single = 7, mi_double = 9, mi_int64 = 12, mi_uint64 = 13,
    mi_matrix = 14, mi_compressed = 15,
  };

  struct Element {
    std::uint32_t type = 0;
    const std::uint8_t* data = nullptr;
    std::size_t size = 0;
    std::size_t consumed = 0;
  };

  static std::uint32_t u32(const std::uint8_t* p) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
  }

  static Element next_element(const std::uint8_t* p, std::size_t avail) {
    if (avail < 8) throw InputError("MAT element header is truncated");
    Element e;
    const std::uint32_t first = u32(p);
    if ((first >> 16) != 0) {  // small data element packed into 8 bytes
      e.type = first & 0xffff;
      e.size = first >> 16;
      e.data = p + 4;
      e.consumed = 8;
      if (e.size > 4) throw InputError("malformed small MAT element");
      return e;
    }
    e.type = first;
    e.size = u32(p + 4);
    e.data = p + 8;
    if (e.size > avail - 8) throw InputError("MAT element overruns the file");
    e.consumed = 8 + e.size;
    if (e.type != mi_compressed) e.consumed = (e.consumed + 7) / 8 * 8;
    if (e.consumed > avail) e.consumed = avail;
    return e;
  }

  static std::vector<double> numeric(const Element& e) {
    auto convert = [&](auto tag) {
      using T = decltype(tag);
      std::vector<double> v(e.size / sizeof(T));
      for (std::size_t i = 0; i < v.size(); ++i) {
        T x;
        std::memcpy(&x, e.data + i * sizeof(T), sizeof(T));
        v[i] = static_cast<double>(x);
      }
      return v;
    };
    switch (e.type) {
      case mi_int8: return convert(std::int8_t{});
      case mi_uint8: return convert(std::uint8_t{});
      case mi_int16: return convert(std::int16_t{});
      case mi_uint16: return convert(std::uint16_t{});
      case mi_int32: return convert(std::int32_t{});
      case mi_uint32: return convert(std::uint32_t{});
      case mi_single: return convert(float{});
      case mi_double: return convert(double{});
      case mi_int64: return convert(std::int64_t{});
      case mi_uint64: return convert(std::uint64_t{});
      default: throw InputError("unsupported MAT numeric type");
    }
  }

  static void parse_matrix(const std::uint8_t* p, std::size_t n,
                           std::map<std::string, Matrix>& out) {
    std::size_t off = 0;
    const Element flags = next_element(p, n);
    off += flags.consumed;
    const std::uint32_t flag_word = u32(flags.data);
    const std::uint32_t cls = flag_word & 0xff;
    const bool complex = (flag_word & 0x800) != 0;
    if (cls < 6 || cls > 15 || complex) return;  // not a real numeric array

    const Element dims_el = next_element(p + off, n - off);
    off += dims_el.consumed;
    const std::vector<double> dims = numeric(dims_el);
    if (dims.size() != 2) return;
    const Element name_el = next_element(p + off, n - off);
    off += name_el.consumed;
    const std::string name(reinterpret_cast<const char*>(name_el.data), name_el.size);
    const Element real = next_element(p + off, n - off);
    const std::vector<double> values = numeric(real);
    const auto rows = static_cast<Eigen::Index>(dims[0]);
    const auto cols = static_cast<Eigen::Index>(dims[1]);
    if (static_cast<std::size_t>(rows * cols) != values.size()) {
      throw InputError("MAT array '" + name + "' has inconsistent size");
    }
    out[name] = Eigen::Map<const Matrix>(values.data(), rows, cols);
  }

  static void parse_elements(const std::uint8_t* p, std::size_t n,
                             std::map<std::string, Matrix>& out) {
    std::size_t off = 0;
    while (n - off >= 8) {
      const Element e = next_element(p + off, n - off);
      if (e.type == mi_matrix) {
        parse_matrix(e.data, e.size, out);
      } else if (e.type == mi_compressed) {
        const auto inflated = inflate(e.data, e.size);
        parse_elements(inflated.data(), inflated.size(), out);
      }
      off += e.consumed;
    }
  }

  static std::vector<std::uint8_t> inflate(const std::uint8_t* data, std::size_t size) {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw InputError("zlib initialization failed");
    zs.next_in = const_cast<Bytef*>(data);
    zs.avail_in = static_cast<uInt>(size);
    std::vector<std::uint8_t> out;
    std::uint8_t chunk[1 << 15];
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
      zs.next_out = chunk;
      zs.avail_out = sizeof chunk;
      rc = ::inflate(&zs, Z_NO_FLUSH);
      if (rc != Z_OK && rc != Z_STREAM_END) {
        inflateEnd(&zs);
        throw InputError("corrupt compressed MAT element");
      }
      out.insert(out.end(), chunk, chunk + (sizeof chunk - zs.avail_out));
      if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) break;
    }
    inflateEnd(&zs);
    return out;
  }
};

}  // namespace magkit::io
