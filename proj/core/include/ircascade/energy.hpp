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

#ifndef IRCASCADE_ENERGY_HPP_
#define IRCASCADE_ENERGY_HPP_

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ircascade/cascade.hpp"
#include "ircascade/numfmt.hpp"

namespace ircascade {

// Per-inference cost of each stage. Defaults are the deployed figures of
// the trigger and the 8-bit CNN on a 205 MHz RISC-V MCU.
struct CostModel {
  double e_trigger = 0.01;  // uJ
  double e_cnn = 1.20;      // uJ
  double t_trigger = 2.96;  // us
  double t_cnn = 316.0;     // us

  void validate() const;
};

// Missing keys keep their defaults; unknown keys are rejected.
CostModel cost_model_from_json(std::string_view json_text);
std::string cost_model_to_json(const CostModel& cost);

struct EnergyReport {
  double invocation_rate = 0.0;
  double avg_energy = 0.0;   // uJ
  double avg_latency = 0.0;  // us
  double savings_vs_static = 0.0;
};

// The trigger runs on every frame, the CNN only on the fraction `rate`.
EnergyReport estimate_at_rate(double rate, const CostModel& cost);
EnergyReport estimate(const Trace& trace, const CostModel& cost);

std::string energy_report_to_json(const EnergyReport& report);

std::vector<std::pair<int, double>> savings_curve(
    const std::map<int, Trace>& traces, const CostModel& cost);

}  // namespace ircascade

#endif  // IRCASCADE_ENERGY_HPP_
