#include "mongoose/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is defined little-endian");

namespace mongoose {

namespace {

constexpr const char* kMagic = "MONGOOSE-CKPT v1";

std::uint64_t fnv1a(const double* data, std::size_t count) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < count * sizeof(double); ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

struct SegmentInfo {
  std::string name;
  long count = 0;
  std::uint64_t checksum = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);

  std::vector<std::pair<std::string, const Eigen::VectorXd*>> payload;
  // The policy segments are stored individually so a corrupt region can be
  // named on load.
  std::vector<Eigen::VectorXd> slices;
  for (const auto& seg : ckpt.params.segments())
    slices.push_back(ckpt.params.flat.segment(seg.offset, seg.size()));
  for (std::size_t i = 0; i < slices.size(); ++i)
    payload.emplace_back(ckpt.params.segments()[i].name, &slices[i]);
  if (ckpt.has_adam) {
    payload.emplace_back("adam_m", &ckpt.adam.m);
    payload.emplace_back("adam_v", &ckpt.adam.v);
  }

  out << kMagic << "\n";
  out << "dimension " << ckpt.dimension << "\n";
  out << "hidden_size " << ckpt.hidden_size << "\n";
  out << "step " << ckpt.step << "\n";
  out << "seed " << ckpt.seed << "\n";
  if (ckpt.has_adam) out << "adam_t " << ckpt.adam.t << "\n";
  for (const auto& [key, value] : ckpt.config_echo)
    out << "config." << key << " " << value << "\n";
  long total = 0;
  for (const auto& [name, vec] : payload) {
    out << "segment " << name << " " << vec->size() << " "
        << fnv1a(vec->data(), static_cast<std::size_t>(vec->size())) << "\n";
    total += vec->size();
  }
  out << "payload_doubles " << total << "\n";
  out << "---\n";
  for (const auto& [name, vec] : payload)
    out.write(reinterpret_cast<const char*>(vec->data()),
              static_cast<std::streamsize>(vec->size() * sizeof(double)));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);

  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw std::runtime_error("checkpoint version mismatch in " + path +
                             " (expected '" + kMagic + "')");

  Checkpoint ckpt;
  std::vector<SegmentInfo> segments;
  long payload_doubles = -1;
  long adam_t = 0;
  while (std::getline(in, line)) {
    if (line == "---") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dimension") ls >> ckpt.dimension;
    else if (key == "hidden_size") ls >> ckpt.hidden_size;
    else if (key == "step") ls >> ckpt.step;
    else if (key == "seed") ls >> ckpt.seed;
    else if (key == "adam_t") ls >> adam_t;
    else if (key == "segment") {
      SegmentInfo seg;
      ls >> seg.name >> seg.count >> seg.checksum;
      segments.push_back(seg);
    } else if (key == "payload_doubles") {
      ls >> payload_doubles;
    } else if (key.rfind("config.", 0) == 0) {
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      ckpt.config_echo[key.substr(7)] = value;
    } else {
      throw std::runtime_error("checkpoint header: unknown key '" + key + "'");
    }
    if (ls.fail())
      throw std::runtime_error("checkpoint header: malformed line '" + line +
                               "'");
  }
  if (ckpt.dimension < 1 || ckpt.hidden_size < 1 || segments.empty())
    throw std::runtime_error("checkpoint header incomplete: " + path);

  long inventory = 0;
  for (const auto& seg : segments) inventory += seg.count;
  if (inventory != payload_doubles)
    throw std::runtime_error(
        "checkpoint inventory mismatch: segments sum to " +
        std::to_string(inventory) + " but payload_doubles is " +
        std::to_string(payload_doubles));

  ckpt.params = PolicyParams(ckpt.dimension, ckpt.hidden_size);
  const auto layout = ckpt.params.segments();

  std::map<std::string, Eigen::VectorXd> loaded;
  for (const auto& seg : segments) {
    Eigen::VectorXd data(seg.count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(seg.count * sizeof(double)));
    if (in.gcount() !=
        static_cast<std::streamsize>(seg.count * sizeof(double)))
      throw std::runtime_error("checkpoint payload truncated in segment '" +
                               seg.name + "'");
    if (fnv1a(data.data(), static_cast<std::size_t>(seg.count)) !=
        seg.checksum)
      throw std::runtime_error("checkpoint checksum failure in segment '" +
                               seg.name + "'");
    loaded[seg.name] = std::move(data);
  }

  for (const auto& seg : layout) {
    auto it = loaded.find(seg.name);
    if (it == loaded.end())
      throw std::runtime_error("checkpoint missing segment '" + seg.name +
                               "'");
    if (it->second.size() != seg.size())
      throw std::runtime_error("checkpoint segment '" + seg.name +
                               "' has wrong size");
    ckpt.params.flat.segment(seg.offset, seg.size()) = it->second;
  }

  if (loaded.count("adam_m") && loaded.count("adam_v")) {
    ckpt.has_adam = true;
    ckpt.adam.m = loaded["adam_m"];
    ckpt.adam.v = loaded["adam_v"];
    ckpt.adam.t = adam_t;
    if (ckpt.adam.m.size() != ckpt.params.total_size() ||
        ckpt.adam.v.size() != ckpt.params.total_size())
      throw std::runtime_error("checkpoint segment 'adam_m' has wrong size");
  }
  return ckpt;
}

}  // namespace mongoose
