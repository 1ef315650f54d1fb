#include "carleman/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace carleman {

// --- SHA-256 (FIPS 180-4) -----------------------------------------------------

namespace {

constexpr std::uint32_t kK[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

void sha256_block(std::uint32_t state[8], const unsigned char* p) {
  std::uint32_t w[64];
  for (int i = 0; i < 16; ++i)
    w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
           (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
  for (int i = 16; i < 64; ++i) {
    const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
    const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
    w[i] = w[i - 16] + s0 + w[i - 7] + s1;
  }
  std::uint32_t a = state[0], b = state[1], c = state[2], d = state[3], e = state[4],
                f = state[5], g = state[6], h = state[7];
  for (int i = 0; i < 64; ++i) {
    const std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
    const std::uint32_t ch = (e & f) ^ (~e & g);
    const std::uint32_t t1 = h + S1 + ch + kK[i] + w[i];
    const std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
    const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
    const std::uint32_t t2 = S0 + maj;
    h = g; g = f; f = e; e = d + t1;
    d = c; c = b; b = a; a = t1 + t2;
  }
  state[0] += a; state[1] += b; state[2] += c; state[3] += d;
  state[4] += e; state[5] += f; state[6] += g; state[7] += h;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  std::uint32_t state[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                            0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  const std::uint64_t bitlen = std::uint64_t(data.size()) * 8;
  std::size_t i = 0;
  for (; i + 64 <= data.size(); i += 64)
    sha256_block(state, reinterpret_cast<const unsigned char*>(data.data()) + i);

  unsigned char tail[128] = {0};
  const std::size_t rem = data.size() - i;
  std::memcpy(tail, data.data() + i, rem);
  tail[rem] = 0x80;
  const std::size_t total = rem + 1 + 8 <= 64 ? 64 : 128;
  for (int b = 0; b < 8; ++b) tail[total - 1 - b] = static_cast<unsigned char>(bitlen >> (8 * b));
  sha256_block(state, tail);
  if (total == 128) sha256_block(state, tail + 64);

  char out[65];
  for (int s = 0; s < 8; ++s) std::snprintf(out + 8 * s, 9, "%08x", state[s]);
  return std::string(out, 64);
}

// --- formatting and files -----------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  os << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open for reading: " + path);
  std::string out((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << "\n";
  }
}

void field_to_csv(const ScalarField& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  const GridDomain& g = *f.grid;
  for (int d = 0; d < g.dim; ++d) os << "x" << d + 1 << ",";
  os << "value\n";
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    if (!g.in_mask[i]) continue;
    const Point x = g.point(i);
    for (int d = 0; d < g.dim; ++d) os << format_double(x[d]) << ",";
    os << format_double(f.values[i]) << "\n";
  }
}

void field_to_binary(const ScalarField& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  const GridDomain& g = *f.grid;
  auto put_u32 = [&os](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<char*>(b), 4);
  };
  auto put_f64 = [&os](double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(u >> (8 * k));
    os.write(reinterpret_cast<char*>(b), 8);
  };
  put_u32(static_cast<std::uint32_t>(g.dim));
  for (int d = 0; d < g.dim; ++d) {
    put_u32(static_cast<std::uint32_t>(g.n_axis));
    put_f64(g.coord(0));
    put_f64(g.coord(g.n_axis - 1));
  }
  for (std::size_t i = 0; i < g.n_nodes; ++i) put_f64(f.values[i]);
}

Json certificate_to_json(const PseudoconvexityCertificate& cert) {
  Json j;
  j["record"] = "pseudoconvexity-certificate";
  j["version"] = 1;
  j["c0"] = cert.c0;
  if (std::isfinite(cert.c0_log)) j["c0_log"] = cert.c0_log;
  j["pass"] = cert.pass;
  j["margin"] = cert.margin;
  j["n_samples"] = cert.n_samples;
  j["tangent_resolution"] = cert.tangent_resolution;
  j["metric"] = cert.metric_name;
  j["weight"] = cert.weight_name;
  if (cert.argmin_point.size() > 0) {
    j["argmin_point"] = std::vector<double>(cert.argmin_point.data(),
                                            cert.argmin_point.data() + cert.argmin_point.size());
    j["argmin_tangent"] = std::vector<double>(
        cert.argmin_tangent.data(), cert.argmin_tangent.data() + cert.argmin_tangent.size());
  }
  if (cert.zero_gradient_hit)
    j["zero_gradient_at"] = std::vector<double>(
        cert.zero_gradient_at.data(), cert.zero_gradient_at.data() + cert.zero_gradient_at.size());
  return j;
}

}  // namespace carleman
