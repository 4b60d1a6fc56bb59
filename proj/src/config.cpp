#include "mongoose/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mongoose {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<int> parse_int_list(const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    if (kv.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

TrainConfig train_config_from_map(
    const std::map<std::string, std::string>& kv) {
  TrainConfig config;
  config.horizon_schedule = {10, 20, 30, 40, 50};
  for (const auto& [key, value] : kv) {
    if (key == "dimension") config.dimension = std::stoi(value);
    else if (key == "hidden_size") config.hidden_size = std::stoi(value);
    else if (key == "batch_size") config.batch_size = std::stoi(value);
    else if (key == "steps_per_phase") config.steps_per_phase = std::stoi(value);
    else if (key == "horizon_schedule")
      config.horizon_schedule = parse_int_list(value);
    else if (key == "alpha") config.alpha = std::stod(value);
    else if (key == "cost_norm") {
      if (value == "L1") config.cost_norm = CostNorm::L1;
      else if (value == "L2") config.cost_norm = CostNorm::L2;
      else throw std::invalid_argument("cost_norm must be L1 or L2");
    } else if (key == "loss_form") {
      if (value == "divide") config.loss_form = LossForm::Divide;
      else if (value == "add") config.loss_form = LossForm::Add;
      else throw std::invalid_argument("loss_form must be divide or add");
    } else if (key == "myopic_detach") config.myopic_detach = std::stoi(value) != 0;
    else if (key == "include_bowl") config.include_bowl = std::stoi(value) != 0;
    else if (key == "noise_variance") config.noise_variance = std::stod(value);
    else if (key == "num_features") config.num_features = std::stoi(value);
    else if (key == "lr_initial") config.lr_initial = std::stod(value);
    else if (key == "lr_reduced") config.lr_reduced = std::stod(value);
    else if (key == "lr_switch_horizon")
      config.lr_switch_horizon = std::stoi(value);
    else if (key == "total_steps") config.total_steps = std::stol(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "workers") config.workers = std::stoi(value);
    else if (key == "grad_clip") config.grad_clip = std::stod(value);
    else if (key == "lengthscale_lo") config.lengthscale_lo = std::stod(value);
    else if (key == "lengthscale_hi") config.lengthscale_hi = std::stod(value);
    else if (key == "lengthscale_mass")
      config.lengthscale_mass = std::stod(value);
    else
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  config.validate();
  return config;
}

std::map<std::string, std::string> train_config_to_map(
    const TrainConfig& config) {
  std::map<std::string, std::string> kv;
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  kv["dimension"] = std::to_string(config.dimension);
  kv["hidden_size"] = std::to_string(config.hidden_size);
  kv["batch_size"] = std::to_string(config.batch_size);
  kv["steps_per_phase"] = std::to_string(config.steps_per_phase);
  std::string sched;
  for (std::size_t i = 0; i < config.horizon_schedule.size(); ++i) {
    if (i) sched += ",";
    sched += std::to_string(config.horizon_schedule[i]);
  }
  kv["horizon_schedule"] = sched;
  kv["alpha"] = fmt(config.alpha);
  kv["cost_norm"] = config.cost_norm == CostNorm::L2 ? "L2" : "L1";
  kv["loss_form"] = config.loss_form == LossForm::Divide ? "divide" : "add";
  kv["myopic_detach"] = config.myopic_detach ? "1" : "0";
  kv["include_bowl"] = config.include_bowl ? "1" : "0";
  kv["noise_variance"] = fmt(config.noise_variance);
  kv["num_features"] = std::to_string(config.num_features);
  kv["lr_initial"] = fmt(config.lr_initial);
  kv["lr_reduced"] = fmt(config.lr_reduced);
  kv["lr_switch_horizon"] = std::to_string(config.lr_switch_horizon);
  kv["total_steps"] = std::to_string(config.total_steps);
  kv["seed"] = std::to_string(config.seed);
  kv["workers"] = std::to_string(config.workers);
  kv["grad_clip"] = fmt(config.grad_clip);
  kv["lengthscale_lo"] = fmt(config.lengthscale_lo);
  kv["lengthscale_hi"] = fmt(config.lengthscale_hi);
  kv["lengthscale_mass"] = fmt(config.lengthscale_mass);
  return kv;
}

}  // namespace mongoose
