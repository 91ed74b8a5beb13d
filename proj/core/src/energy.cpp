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

#include "ircascade/energy.hpp"

#include <string>

#include "ircascade/error.hpp"
#include "json.hpp"

namespace ircascade {

void CostModel::validate() const {
  if (!(e_trigger > 0.0 && e_cnn > 0.0 && t_trigger > 0.0 && t_cnn > 0.0)) {
    throw InvalidArgument("cost model values must all be positive");
  }
}

CostModel cost_model_from_json(std::string_view json_text) {
  using nlohmann::json;
  CostModel cost;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw FormatError("cost model must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "e_trigger") cost.e_trigger = value.get<double>();
      else if (key == "e_cnn") cost.e_cnn = value.get<double>();
      else if (key == "t_trigger") cost.t_trigger = value.get<double>();
      else if (key == "t_cnn") cost.t_cnn = value.get<double>();
      else throw FormatError("cost model: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("cost model: ") + e.what());
  }
  cost.validate();
  return cost;
}

std::string cost_model_to_json(const CostModel& cost) {
  nlohmann::ordered_json j;
  j["e_trigger"] = cost.e_trigger;
  j["e_cnn"] = cost.e_cnn;
  j["t_trigger"] = cost.t_trigger;
  j["t_cnn"] = cost.t_cnn;
  return j.dump(2);
}

EnergyReport estimate_at_rate(double rate, const CostModel& cost) {
  cost.validate();
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("invocation rate must lie in [0, 1]");
  EnergyReport r;
  r.invocation_rate = rate;
  r.avg_energy = cost.e_trigger + rate * cost.e_cnn;
  r.avg_latency = cost.t_trigger + rate * cost.t_cnn;
  r.savings_vs_static = 1.0 - r.avg_energy / cost.e_cnn;
  return r;
}

EnergyReport estimate(const Trace& trace, const CostModel& cost) {
  if (trace.size() == 0) throw InvalidArgument("estimate: empty trace");
  return estimate_at_rate(
      static_cast<double>(trace.cnn_invocations()) / static_cast<double>(trace.size()), cost);
}

std::string energy_report_to_json(const EnergyReport& report) {
  // Hand-written so numbers keep the six-significant-digit report format.
  std::string out = "{\n";
  out += "  \"invocation_rate\": " + format_number(report.invocation_rate) + ",\n";
  out += "  \"avg_energy_uJ\": " + format_number(report.avg_energy) + ",\n";
  out += "  \"avg_latency_us\": " + format_number(report.avg_latency) + ",\n";
  out += "  \"savings_vs_static\": " + format_number(report.savings_vs_static) + "\n}\n";
  return out;
}

std::vector<std::pair<int, double>> savings_curve(const std::map<int, Trace>& traces,
                                                  const CostModel& cost) {
  if (traces.empty()) throw InvalidArgument("savings_curve: no traces");
  std::vector<std::pair<int, double>> curve;
  curve.reserve(traces.size());
  for (const auto& [threshold, trace] : traces) {
    curve.emplace_back(threshold, estimate(trace, cost).savings_vs_static);
  }
  return curve;
}

}  // namespace ircascade
