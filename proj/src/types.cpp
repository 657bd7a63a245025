#include "sam/types.hpp"

#include <algorithm>
#include <sstream>

namespace sam {

std::string Location::str() const {
  std::ostringstream os;
  os << (file.empty() ? "<input>" : file);
  if (line > 0) {
    os << ':' << line;
    if (column > 0) os << ':' << column;
  }
  return os.str();
}

SpecError::SpecError(ErrorKind kind, Location where, std::string entity, const std::string& what)
    : std::runtime_error(where.str() + ": " + to_string(kind) + " error in '" + entity + "': " + what),
      kind_(kind),
      where_(std::move(where)),
      entity_(std::move(entity)) {}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::syntax: return "syntax";
    case ErrorKind::reference: return "reference";
    case ErrorKind::invariant: return "invariant";
    case ErrorKind::io: return "io";
    case ErrorKind::unsupported: return "unsupported";
  }
  return "?";
}

const char* to_string(EnergyAction a) {
  switch (a) {
    case EnergyAction::read: return "read";
    case EnergyAction::write: return "write";
    case EnergyAction::metadata_read: return "metadata_read";
    case EnergyAction::metadata_write: return "metadata_write";
    case EnergyAction::compute: return "compute";
  }
  return "?";
}

const char* to_string(RankKind k) {
  switch (k) {
    case RankKind::U: return "U";
    case RankKind::UB: return "UB";
    case RankKind::B: return "B";
    case RankKind::CP: return "CP";
    case RankKind::RLE: return "RLE";
    case RankKind::UOP: return "UOP";
  }
  return "?";
}

const char* to_string(SafKind k) { return k == SafKind::gate ? "gate" : "skip"; }

const char* to_string(DensityKind k) {
  switch (k) {
    case DensityKind::uniform: return "uniform";
    case DensityKind::fixed_structured: return "fixed_structured";
    case DensityKind::banded: return "banded";
    case DensityKind::actual_data: return "actual_data";
  }
  return "?";
}

std::int64_t ConcreteTensor::size() const {
  std::int64_t s = 1;
  for (auto d : dims) s *= d;
  return s;
}

std::int64_t ConcreteTensor::linear_index(const std::vector<std::int64_t>& coord) const {
  std::int64_t idx = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) idx = idx * dims[i] + coord[i];
  return idx;
}

std::vector<std::uint8_t> ConcreteTensor::bitmap() const {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(size()), 0);
  for (const auto& c : nonzeros) bits[static_cast<std::size_t>(linear_index(c))] = 1;
  return bits;
}

bool DensityModelSpec::operator==(const DensityModelSpec& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case DensityKind::uniform: return density == o.density && bernoulli == o.bernoulli;
    case DensityKind::fixed_structured: return n == o.n && m == o.m && dim == o.dim;
    case DensityKind::banded: return band_width == o.band_width && band_dims == o.band_dims;
    case DensityKind::actual_data:
      if (data && o.data) return *data == *o.data;
      return path == o.path;
  }
  return false;
}

int Workload::dim_index(const std::string& name) const {
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (dims[i].name == name) return static_cast<int>(i);
  return -1;
}

int Workload::tensor_index(const std::string& name) const {
  for (std::size_t i = 0; i < tensors.size(); ++i)
    if (tensors[i].name == name) return static_cast<int>(i);
  return -1;
}

int Workload::output_index() const {
  for (std::size_t i = 0; i < tensors.size(); ++i)
    if (tensors[i].is_output) return static_cast<int>(i);
  return -1;
}

std::vector<int> Workload::tensor_dims(int tensor) const {
  std::vector<int> out;
  for (const auto& d : tensors[static_cast<std::size_t>(tensor)].projection) out.push_back(dim_index(d));
  return out;
}

bool Workload::tensor_has_dim(int tensor, int dim) const {
  const auto& p = tensors[static_cast<std::size_t>(tensor)].projection;
  return std::find(p.begin(), p.end(), dims[static_cast<std::size_t>(dim)].name) != p.end();
}

std::int64_t Workload::total_operations() const {
  std::int64_t n = 1;
  for (const auto& d : dims) n *= d.bound;
  return n;
}

int Architecture::level_index(const std::string& name) const {
  for (std::size_t i = 0; i < storage.size(); ++i)
    if (storage[i].name == name) return static_cast<int>(i);
  return -1;
}

std::int64_t Architecture::instances(int level) const {
  std::int64_t n = 1;
  for (int i = 0; i < level && i < num_storage(); ++i) n *= storage[static_cast<std::size_t>(i)].fanout;
  return n;
}

bool RepresentationFormat::compressed() const {
  return std::any_of(ranks.begin(), ranks.end(), [](const RankFormat& r) { return r.kind != RankKind::U; });
}

const LevelSafs* SafSpec::find(const std::string& level) const {
  for (const auto& l : levels)
    if (l.level == level) return &l;
  return nullptr;
}

const RepresentationFormat* SafSpec::format(const std::string& level, const std::string& tensor) const {
  const auto* l = find(level);
  if (!l) return nullptr;
  auto it = l->formats.find(tensor);
  if (it == l->formats.end() || !it->second.compressed()) return nullptr;
  return &it->second;
}

const LevelConstraints* MapspaceConstraints::find(const std::string& level) const {
  for (const auto& l : levels)
    if (l.level == level) return &l;
  return nullptr;
}

const EnergyCost* EnergyTable::find(const std::string& component, EnergyAction action) const {
  auto it = entries.find({component, action});
  return it == entries.end() ? nullptr : &it->second;
}

}  // namespace sam
