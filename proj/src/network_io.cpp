#include "quadnet/network_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "quadnet/errors.hpp"
#include "quadnet/format.hpp"

namespace quadnet {

namespace {

void write_vector(std::string& out, std::span<const double> v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt17(v[i]);
  }
  out += ']';
}

void write_matrix(std::string& out, const Matrix& m) {
  out += '[';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (r) out += ',';
    write_vector(out, m.row(r));
  }
  out += ']';
}

void read_vector(const nlohmann::json& j, Vector& v, const char* name) {
  if (!j.is_array() || j.size() != v.size()) throw ValidationError(std::string("network json: bad ") + name);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
}

void read_matrix(const nlohmann::json& j, Matrix& m, const char* name) {
  if (!j.is_array() || j.size() != m.rows()) throw ValidationError(std::string("network json: bad ") + name);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != m.cols()) throw ValidationError(std::string("network json: bad ") + name);
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = row[c].get<double>();
  }
}

}  // namespace

std::string network_to_json(const Network& net) {
  std::string out = "{\"format\":\"quadnet-network\",\"version\":" + std::to_string(kNetworkFormatVersion) +
                    ",\"layers\":[";
  for (std::size_t i = 0; i < net.depth(); ++i) {
    const Layer& l = net.layer(i);
    if (i) out += ',';
    out += "\n{\"kind\":\"" + std::string(to_string(l.kind())) + "\",\"activation\":\"" +
           std::string(to_string(l.activation())) + "\",\"frozen\":" + (l.frozen() ? "true" : "false") +
           ",\"in\":" + std::to_string(l.in_dim()) + ",\"out\":" + std::to_string(l.out_dim());
    out += ",\"w1\":";
    write_matrix(out, l.w1());
    out += ",\"b1\":";
    write_vector(out, l.b1().span());
    if (l.kind() == NeuronKind::quadratic) {
      out += ",\"w2\":";
      write_matrix(out, l.w2());
      out += ",\"b2\":";
      write_vector(out, l.b2().span());
      out += ",\"w3\":";
      write_matrix(out, l.w3());
      out += ",\"b3\":";
      write_vector(out, l.b3().span());
    }
    out += '}';
  }
  out += "]}\n";
  return out;
}

Network network_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("network json: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "quadnet-network") throw ValidationError("network json: wrong format tag");
    if (doc.value("version", -1) != kNetworkFormatVersion) throw ValidationError("network json: unsupported version");
    std::vector<Layer> layers;
    for (const auto& jl : doc.at("layers")) {
      Layer l(parse_neuron_kind(jl.at("kind").get<std::string>()), jl.at("in").get<std::size_t>(),
              jl.at("out").get<std::size_t>(), parse_activation(jl.at("activation").get<std::string>()));
      l.set_frozen(jl.value("frozen", false));
      read_matrix(jl.at("w1"), l.w1(), "w1");
      read_vector(jl.at("b1"), l.b1(), "b1");
      if (l.kind() == NeuronKind::quadratic) {
        read_matrix(jl.at("w2"), l.w2(), "w2");
        read_vector(jl.at("b2"), l.b2(), "b2");
        read_matrix(jl.at("w3"), l.w3(), "w3");
        read_vector(jl.at("b3"), l.b3(), "b3");
      }
      layers.push_back(std::move(l));
    }
    return Network(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("network json: ") + e.what());
  }
}

void save_network(const std::string& path, const Network& net) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << network_to_json(net);
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return network_from_json(ss.str());
}

}  // namespace quadnet
