#include "faasim/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "faasim/error.hpp"
#include "faasim/version.hpp"

namespace faasim {

namespace {

struct DigestCtx {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

  DigestCtx() {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
      throw Error("sha256: OpenSSL digest init failed");
    }
  }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx.get(), data, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 0xf];
    }
    return out;
  }
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  DigestCtx d;
  d.update(bytes.data(), bytes.size());
  return d.hex();
}

InputDigest digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  DigestCtx d;
  InputDigest out{path.string(), {}, 0};
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto n = static_cast<std::size_t>(in.gcount());
    d.update(buf.data(), n);
    out.bytes += n;
  }
  out.sha256 = d.hex();
  return out;
}

nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json doc;
  doc["tool"] = "faasim";
  doc["version"] = kVersion;
  doc["command"] = m.command;
  doc["parameters"] = m.parameters;
  auto& inputs = doc["inputs"] = nlohmann::ordered_json::array();
  for (const auto& i : m.inputs) {
    inputs.push_back({{"path", i.path}, {"sha256", i.sha256}, {"bytes", i.bytes}});
  }
  doc["outputs"] = m.outputs;
  doc["results"] = m.results;
  doc["wall_clock_s"] = m.wall_clock_s;
  return doc;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(manifest).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace faasim
