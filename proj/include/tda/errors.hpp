// include/tda/errors.hpp
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

#ifndef TDA_ERRORS_HPP
#define TDA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tda {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- audio_io ---
class WavFormatError : public Error {       // malformed RIFF/WAVE header
 public:
  using Error::Error;
};
class WavUnsupportedError : public Error {  // non-PCM, >1 channel, bit depth != 16
 public:
  using Error::Error;
};
class WavTruncatedError : public Error {    // data chunk shorter than declared
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};
class ZeroSignalError : public Error {      // dB of an all-zero signal is undefined
 public:
  using Error::Error;
};
class SizeMismatchError : public Error {    // length/rate mismatch between clips
 public:
  using Error::Error;
};

// --- text_metrics ---
class EmptyReferenceError : public Error {  // ER with N = 0 is undefined
 public:
  using Error::Error;
};
class UndefinedRatioError : public Error {  // effectiveness ratio with zero denominator
 public:
  using Error::Error;
};

// --- transforms / frontend ---
class ClipTooShortError : public Error {
 public:
  using Error::Error;
};
class InsufficientFramesError : public Error {
 public:
  using Error::Error;
};
class RateMismatchError : public Error {
 public:
  using Error::Error;
};

// --- toy_asr ---
class AlphabetError : public Error {        // character outside the model alphabet
 public:
  using Error::Error;
};
class TargetTooLongError : public Error {   // CTC target does not fit the frame budget
 public:
  using Error::Error;
};
class TrainingError : public Error {        // divergence (non-finite loss)
 public:
  using Error::Error;
};
class ModelFormatError : public Error {     // unreadable/incompatible model artifact
 public:
  using Error::Error;
};

// --- asr_backend ---
class TranscriptionError : public Error {   // launch/connect failure, timeout, bad response
 public:
  using Error::Error;
};

// --- eval_harness ---
class ManifestError : public Error {        // malformed line, duplicate id, missing file
 public:
  using Error::Error;
};
class SingleClassError : public Error {     // AUC/ROC need both labels
 public:
  using Error::Error;
};

// --- cli / config ---
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tda

#endif  // TDA_ERRORS_HPP
