/* Copyright 2026 The ircascade Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef IRCASCADE_ERROR_HPP_
#define IRCASCADE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ircascade {

// Base for every error raised by the library. Callers that only care about
// "something in ircascade failed" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file or document does not match the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Argument violates an operation's precondition (shape, range, state).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace ircascade

#endif  // IRCASCADE_ERROR_HPP_
