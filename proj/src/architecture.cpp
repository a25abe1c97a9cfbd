#include "darn/architecture.hpp"

#include <cctype>
#include <sstream>

#include "darn/errors.hpp"

namespace darn {
namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

int parse_positive(const std::string& text, const std::string& what, int min_value) {
  std::size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(text, &pos);
  } catch (const std::exception&) {
    throw UsageError("architecture: bad integer for " + what + ": '" + text + "'");
  }
  if (pos != text.size())
    throw UsageError("architecture: trailing characters in " + what + ": '" + text + "'");
  if (value < min_value)
    throw UsageError("architecture: " + what + " must be >= " + std::to_string(min_value) +
                     ", got " + std::to_string(value));
  return value;
}

}  // namespace

int Architecture::total_hidden() const {
  int total = 0;
  for (const auto& layer : layers) total += layer.n_h;
  return total;
}

void Architecture::validate() const {
  if (n_x < 1) throw UsageError("architecture: n_x must be >= 1");
  if (layers.empty()) throw UsageError("architecture: at least one stochastic layer required");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].n_h < 1)
      throw UsageError("architecture: layer " + std::to_string(i) + ": n_h must be >= 1");
    if (layers[i].det_width < 0)
      throw UsageError("architecture: layer " + std::to_string(i) + ": det width must be >= 0");
  }
}

Architecture parse_architecture(const std::string& text) {
  Architecture arch;
  bool saw_x = false;
  for (const std::string& raw_term : split(text, ';')) {
    const std::string term = strip(raw_term);
    if (term.empty()) continue;
    std::vector<std::string> attrs = split(term, ',');
    const std::string head = strip(attrs[0]);
    if (head.rfind("x=", 0) == 0) {
      if (saw_x) throw UsageError("architecture: duplicate x term");
      if (!arch.layers.empty()) throw UsageError("architecture: x term must come first");
      arch.n_x = parse_positive(strip(head.substr(2)), "n_x", 1);
      saw_x = true;
      for (std::size_t a = 1; a < attrs.size(); ++a) {
        const std::string attr = strip(attrs[a]);
        if (attr == "ar") {
          arch.visible_autoregressive = true;
        } else {
          throw UsageError("architecture: unknown attribute '" + attr + "' on x term");
        }
      }
    } else if (head.rfind("h=", 0) == 0) {
      if (!saw_x) throw UsageError("architecture: x term must come before layers");
      StochasticLayerSpec layer;
      layer.n_h = parse_positive(strip(head.substr(2)), "n_h", 1);
      for (std::size_t a = 1; a < attrs.size(); ++a) {
        const std::string attr = strip(attrs[a]);
        if (attr.rfind("det=", 0) == 0) {
          layer.det_width = parse_positive(strip(attr.substr(4)), "det width", 0);
        } else if (attr == "enc-ar") {
          layer.encoder_autoregressive = true;
        } else if (attr == "no-dec-ar") {
          layer.decoder_autoregressive = false;
        } else {
          throw UsageError("architecture: unknown attribute '" + attr + "'");
        }
      }
      arch.layers.push_back(layer);
    } else {
      throw UsageError("architecture: unknown term '" + term + "'");
    }
  }
  arch.validate();
  return arch;
}

std::string format_architecture(const Architecture& arch) {
  std::ostringstream out;
  out << "x=" << arch.n_x;
  if (arch.visible_autoregressive) out << ",ar";
  for (const auto& layer : arch.layers) {
    out << ";h=" << layer.n_h;
    if (layer.det_width > 0) out << ",det=" << layer.det_width;
    if (layer.encoder_autoregressive) out << ",enc-ar";
    if (!layer.decoder_autoregressive) out << ",no-dec-ar";
  }
  return out.str();
}

}  // namespace darn
