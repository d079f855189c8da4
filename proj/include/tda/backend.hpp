// include/tda/backend.hpp
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

#ifndef TDA_BACKEND_HPP
#define TDA_BACKEND_HPP

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "tda/audio.hpp"
#include "tda/toy_asr.hpp"

namespace tda {

// Uniform transcription interface over interchangeable engines. Every
// backend's output passes through normalize_text before use.

struct ToyBackend {
  std::shared_ptr<const ToyRnn> model;
};

// The command line is `program` followed by `args`, where every occurrence
// of {} in an argument is replaced with the path of a temporary WAV file
// holding the clip. The process must print exactly one line of transcript
// on stdout and exit 0.
struct CommandBackend {
  std::string program;
  std::vector<std::string> args{"{}"};
};

// POST of the raw WAV bytes to `url`; the response must be a JSON object
// with a "text" field. One retry on connection-level failure. In-flight
// requests are bounded by max_in_flight.
struct HttpBackend {
  std::string url;
  int timeout_seconds = 30;
  int max_in_flight = 4;
};

// Exact id -> transcript lookup; unknown ids raise TranscriptionError (the
// way a scripted run simulates a failing clip). Used for mocks and for
// ingesting externally produced transcripts.
struct ScriptedBackend {
  std::map<std::string, std::string> table;
};

using Backend = std::variant<ToyBackend, CommandBackend, HttpBackend, ScriptedBackend>;

std::string backend_name(const Backend& b);

// Normalized transcript of one clip; throws TranscriptionError (or the toy
// model's own errors) on failure.
std::string transcribe(const Backend& backend, const AudioClip& clip);

struct BatchResult {
  std::string id;
  bool ok = false;
  std::string transcript;  // valid when ok
  std::string error;       // valid when !ok
};

// Order-preserving; one entry per input clip; per-clip failures are captured
// in the result rather than thrown. `workers` bounds the parallelism (http
// backends are additionally bounded by their own in-flight limit).
std::vector<BatchResult> transcribe_batch(const Backend& backend,
                                          const std::vector<AudioClip>& clips, int workers = 1);

}  // namespace tda

#endif  // TDA_BACKEND_HPP
