// src/audio.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tda/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "tda/errors.hpp"

namespace tda {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

RealWave to_real(const AudioClip& clip) {
  RealWave w;
  w.sample_rate = clip.sample_rate;
  w.values.resize(clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    w.values[i] = static_cast<double>(clip.samples[i]) / kInt16Scale;
  }
  return w;
}

std::int16_t real_to_int16(double v) {
  double scaled = v * kInt16Scale;
  scaled = std::max(-32768.0, std::min(32767.0, std::round(scaled)));
  return static_cast<std::int16_t>(scaled);
}

AudioClip to_clip(const RealWave& wave, std::string id) {
  AudioClip clip;
  clip.id = std::move(id);
  clip.sample_rate = wave.sample_rate;
  clip.samples.resize(wave.values.size());
  for (std::size_t i = 0; i < wave.values.size(); ++i) {
    clip.samples[i] = real_to_int16(wave.values[i]);
  }
  return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();

  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw WavFormatError("not a RIFF/WAVE file: " + path.string());
  }

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const char* chunk_id = reinterpret_cast<const char*>(data + pos);
    const std::uint32_t chunk_size = read_u32(data + pos + 4);
    const std::size_t body = pos + 8;

    if (std::memcmp(chunk_id, "fmt ", 4) == 0) {
      if (body + 16 > size || chunk_size < 16) throw WavFormatError("truncated fmt chunk");
      format_tag = read_u16(data + body);
      channels = read_u16(data + body + 2);
      sample_rate = read_u32(data + body + 4);
      bits = read_u16(data + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk_id, "data", 4) == 0) {
      if (!have_fmt) throw WavFormatError("data chunk before fmt chunk");
      if (format_tag != 1) throw WavUnsupportedError("non-PCM encoding (format tag " + std::to_string(format_tag) + ")");
      if (channels != 1) throw WavUnsupportedError("expected mono, got " + std::to_string(channels) + " channels");
      if (bits != 16) throw WavUnsupportedError("expected 16-bit samples, got " + std::to_string(bits));
      if (sample_rate == 0) throw WavFormatError("zero sample rate");
      if (body + chunk_size > size) throw WavTruncatedError("data chunk extends past end of file");
      if (chunk_size % 2 != 0) throw WavFormatError("odd data chunk size for 16-bit samples");

      AudioClip clip;
      clip.id = path.stem().string();
      clip.sample_rate = static_cast<int>(sample_rate);
      const std::size_t n = chunk_size / 2;
      clip.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const unsigned char lo = data[body + 2 * i];
        const unsigned char hi = data[body + 2 * i + 1];
        clip.samples[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
      }
      if (clip.samples.empty()) throw WavFormatError("empty data chunk");
      return clip;
    }
    // skip unknown chunks (LIST, fact, ...); chunks are word-aligned
    pos = body + chunk_size + (chunk_size % 2);
  }
  throw WavFormatError(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

std::string wav_bytes(const AudioClip& clip) {
  const std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  put_u32(out, 36 + data_size);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);  // byte rate
  put_u16(out, 2);                                                 // block align
  put_u16(out, 16);                                                // bits per sample
  out.append("data");
  put_u32(out, data_size);
  for (std::int16_t s : clip.samples) {
    const auto u = static_cast<std::uint16_t>(s);
    out.push_back(static_cast<char>(u & 0xff));
    out.push_back(static_cast<char>((u >> 8) & 0xff));
  }
  return out;
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  const std::string out = wav_bytes(clip);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write: " + path.string());
}

double db_scale(const AudioClip& clip) {
  std::int32_t peak = 0;
  for (std::int16_t s : clip.samples) {
    peak = std::max(peak, std::abs(static_cast<std::int32_t>(s)));
  }
  if (peak == 0) throw ZeroSignalError("dB of an all-zero clip is undefined");
  return 20.0 * std::log10(static_cast<double>(peak));
}

double db_distortion(const AudioClip& x, const AudioClip& delta) {
  if (x.samples.size() != delta.samples.size()) {
    throw SizeMismatchError("db_distortion: length mismatch");
  }
  if (x.sample_rate != delta.sample_rate) {
    throw SizeMismatchError("db_distortion: sample rate mismatch");
  }
  return db_scale(delta) - db_scale(x);
}

}  // namespace tda
