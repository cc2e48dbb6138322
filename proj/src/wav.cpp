// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sasbss/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace sasbss {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::vector<unsigned char>& v, std::uint32_t x) {
  v.push_back(x & 0xFF);
  v.push_back((x >> 8) & 0xFF);
  v.push_back((x >> 16) & 0xFF);
  v.push_back((x >> 24) & 0xFF);
}

void wr_u16(std::vector<unsigned char>& v, std::uint16_t x) {
  v.push_back(x & 0xFF);
  v.push_back((x >> 8) & 0xFF);
}

}  // namespace

WavData load_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("wav: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0)
    throw DataError("wav: missing RIFF chunk in " + path);
  if (std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw DataError("wav: RIFF chunk is not WAVE in " + path);

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    char id[5] = {0};
    std::memcpy(id, buf.data() + pos, 4);
    const std::uint32_t len = rd_u32(buf.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > buf.size())
      throw DataError(std::string("wav: truncated '") + id + "' chunk in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw DataError("wav: short fmt chunk in " + path);
      format = rd_u16(buf.data() + body);
      channels = rd_u16(buf.data() + body + 2);
      rate = rd_u32(buf.data() + body + 4);
      bits = rd_u16(buf.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = buf.data() + body;
      data_len = len;
    }
    pos = body + len + (len % 2);  // chunks are word aligned
  }

  if (!have_fmt) throw DataError("wav: missing fmt chunk in " + path);
  if (!data) throw DataError("wav: missing data chunk in " + path);
  if (format != 1)
    throw DataError("wav: fmt chunk: unsupported audio format " +
                    std::to_string(format) + " (want PCM=1) in " + path);
  if (bits != 16)
    throw DataError("wav: fmt chunk: unsupported bit depth " + std::to_string(bits) +
                    " (want 16) in " + path);
  if (channels < 1 || channels > 2)
    throw DataError("wav: fmt chunk: unsupported channel count " +
                    std::to_string(channels) + " in " + path);

  const std::size_t frames = data_len / (2 * channels);
  WavData w;
  w.sample_rate = static_cast<double>(rate);
  w.samples.resize(channels, static_cast<Eigen::Index>(frames));
  for (std::size_t n = 0; n < frames; ++n)
    for (int c = 0; c < channels; ++c) {
      const auto* p = data + 2 * (n * channels + c);
      const auto s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      w.samples(c, static_cast<Eigen::Index>(n)) = s / 32768.0;
    }
  return w;
}

void write_wav(const std::string& path, const Eigen::MatrixXd& samples, double rate) {
  const auto channels = samples.rows();
  const auto frames = samples.cols();
  if (channels < 1 || channels > 2)
    throw DataError("wav: can only write mono or stereo");
  if (!(rate > 0.0)) throw DataError("wav: bad sample rate");

  const std::uint32_t data_len = static_cast<std::uint32_t>(frames * channels * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  wr_u32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  wr_u32(out, 16);
  wr_u16(out, 1);  // PCM
  wr_u16(out, static_cast<std::uint16_t>(channels));
  const auto irate = static_cast<std::uint32_t>(std::lround(rate));
  wr_u32(out, irate);
  wr_u32(out, irate * static_cast<std::uint32_t>(channels) * 2);
  wr_u16(out, static_cast<std::uint16_t>(channels * 2));
  wr_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  wr_u32(out, data_len);

  for (Eigen::Index n = 0; n < frames; ++n)
    for (Eigen::Index c = 0; c < channels; ++c) {
      double v = std::lround(samples(c, n) * 32768.0);
      v = std::min(32767.0, std::max(-32768.0, v));
      const auto s = static_cast<std::int16_t>(v);
      wr_u16(out, static_cast<std::uint16_t>(s));
    }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("wav: cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("wav: write failed for " + path);
}

}  // namespace sasbss
