// include/tda/audio.hpp
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

#ifndef TDA_AUDIO_HPP
#define TDA_AUDIO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tda {

constexpr int kDefaultSampleRate = 16000;
constexpr double kInt16Scale = 32768.0;

// Mono PCM waveform, 16-bit integer amplitudes.
struct AudioClip {
  std::string id;
  std::vector<std::int16_t> samples;
  int sample_rate = kDefaultSampleRate;

  bool operator==(const AudioClip&) const = default;
};

// Real-valued working representation in [-1, 1]; perturbations and gradients
// live here.
struct RealWave {
  std::vector<double> values;
  int sample_rate = kDefaultSampleRate;
};

// Valid real amplitude range: int16 min/max divided by 32768.
constexpr double kRealAmpMin = -1.0;
constexpr double kRealAmpMax = 32767.0 / 32768.0;

RealWave to_real(const AudioClip& clip);
// Rounds to nearest (ties away from zero) and clamps into int16.
AudioClip to_clip(const RealWave& wave, std::string id);
std::int16_t real_to_int16(double v);

// RIFF/WAVE PCM, 16-bit little-endian, mono. The reader walks chunks and
// rejects anything that is not plain PCM16 mono; the writer emits the
// canonical 44-byte header. Round-trips are bit-exact.
AudioClip read_wav(const std::filesystem::path& path);
void write_wav(const AudioClip& clip, const std::filesystem::path& path);
std::string wav_bytes(const AudioClip& clip);  // same bytes write_wav puts on disk

// Peak loudness max_i 20*log10(|sample_i|) on the raw 16-bit integer scale.
// Throws ZeroSignalError when every sample is zero.
double db_scale(const AudioClip& clip);

// Relative perturbation loudness db_scale(delta) - db_scale(x).
double db_distortion(const AudioClip& x, const AudioClip& delta);

}  // namespace tda

#endif  // TDA_AUDIO_HPP
