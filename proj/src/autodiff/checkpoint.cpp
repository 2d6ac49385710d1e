#include "mfgan/autodiff/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mfgan/common/error.hpp"

namespace mfgan::ad {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian doubles");

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ostringstream header;
  header << "mfgan-checkpoint " << kCheckpointVersion << '\n' << "widths";
  for (int w : checkpoint.spec.widths) header << ' ' << w;
  header << '\n' << "activation " << activation_name(checkpoint.spec.activation) << '\n' << "periodic";
  for (bool p : checkpoint.spec.periodic) header << ' ' << (p ? 1 : 0);
  header << '\n'
         << "extras " << checkpoint.spec.extras << '\n'
         << "count " << checkpoint.params.size() << '\n'
         << "params\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint file " + path.string() + " for writing");
  const std::string text = header.str();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto& values = checkpoint.params.values();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw Error("failed writing checkpoint file " + path.string());
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  // Returns the whitespace-separated fields of the next line, whose first
  // field must be `section`.
  std::vector<std::string> line(const std::string& section) {
    const std::size_t start = pos_;
    const std::size_t end = bytes_.find('\n', pos_);
    if (end == std::string::npos) {
      throw ParseError(section, start, "missing section '" + section + "' (file truncated)");
    }
    std::istringstream fields(bytes_.substr(pos_, end - pos_));
    std::vector<std::string> out{std::istream_iterator<std::string>(fields), {}};
    if (out.empty() || out.front() != section) {
      throw ParseError(section, start, "expected section '" + section + "'");
    }
    pos_ = end + 1;
    out.erase(out.begin());
    return out;
  }

  std::size_t position() const { return pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

long parse_int(const std::string& text, const std::string& section, std::size_t offset) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(section, offset, "not an integer: '" + text + "'");
  }
}

}  // namespace

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint file " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), {}};
  HeaderReader reader(bytes);

  std::size_t at = reader.position();
  const auto magic = reader.line("mfgan-checkpoint");
  if (magic.size() != 1 || parse_int(magic[0], "mfgan-checkpoint", at) != kCheckpointVersion) {
    throw ParseError("mfgan-checkpoint", at, "unsupported checkpoint version");
  }
  Checkpoint cp;
  at = reader.position();
  for (const auto& w : reader.line("widths")) cp.spec.widths.push_back(static_cast<int>(parse_int(w, "widths", at)));
  at = reader.position();
  const auto act = reader.line("activation");
  if (act.size() != 1) throw ParseError("activation", at, "expected one activation tag");
  try {
    cp.spec.activation = parse_activation(act[0]);
  } catch (const ConfigError&) {
    throw ParseError("activation", at, "unknown activation '" + act[0] + "'");
  }
  at = reader.position();
  for (const auto& p : reader.line("periodic")) {
    const long flag = parse_int(p, "periodic", at);
    if (flag != 0 && flag != 1) throw ParseError("periodic", at, "periodic flags must be 0 or 1");
    cp.spec.periodic.push_back(flag == 1);
  }
  at = reader.position();
  const auto extras = reader.line("extras");
  if (extras.size() != 1) throw ParseError("extras", at, "expected one integer");
  cp.spec.extras = static_cast<int>(parse_int(extras[0], "extras", at));
  at = reader.position();
  const auto count_field = reader.line("count");
  if (count_field.size() != 1) throw ParseError("count", at, "expected one integer");
  const long count = parse_int(count_field[0], "count", at);
  if (count < 0) throw ParseError("count", at, "negative parameter count");
  at = reader.position();
  reader.line("params");

  const std::size_t data_start = reader.position();
  const std::size_t need = static_cast<std::size_t>(count) * sizeof(double);
  if (bytes.size() - data_start < need) {
    throw ParseError("params", bytes.size(),
                     "missing parameter data: expected " + std::to_string(need) + " bytes, found " +
                         std::to_string(bytes.size() - data_start));
  }
  if (bytes.size() - data_start > need) {
    throw ParseError("params", data_start + need, "trailing bytes after parameter data");
  }
  std::vector<double> values(static_cast<std::size_t>(count));
  if (need > 0) std::memcpy(values.data(), bytes.data() + data_start, need);
  cp.params = ParamVector(std::move(values));

  if (!cp.spec.widths.empty()) {
    const Mlp net(cp.spec);  // validates the architecture
    if (net.parameter_count() != cp.params.size()) {
      throw ParseError("count", at, "count " + std::to_string(count) + " does not match architecture (" +
                                        std::to_string(net.parameter_count()) + ")");
    }
  }
  return cp;
}

}  // namespace mfgan::ad
