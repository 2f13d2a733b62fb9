#include "ttql/mdp_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ttql {

using ordered_json = nlohmann::ordered_json;

namespace {

template <class T>
T required(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("field '") + key + "': " + e.what());
    }
}

nlohmann::json parse_object(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("expected a JSON object");
    return doc;
}

} // namespace

std::string mdp_to_json(const Mdp& mdp) {
    ordered_json doc;
    doc["n_states"] = mdp.n_states();
    doc["n_actions"] = mdp.n_actions();
    doc["gamma"] = mdp.gamma();
    doc["reward"] = std::vector<double>(mdp.rewards().begin(), mdp.rewards().end());
    doc["transition"] = std::vector<double>(mdp.transitions().begin(), mdp.transitions().end());
    return doc.dump() + "\n";
}

Mdp mdp_from_json(std::string_view text) {
    const auto doc = parse_object(text);
    return Mdp(required<std::size_t>(doc, "n_states"), required<std::size_t>(doc, "n_actions"),
               required<std::vector<double>>(doc, "reward"),
               required<std::vector<double>>(doc, "transition"), required<double>(doc, "gamma"));
}

std::string qtable_to_json(const QTable& q) {
    ordered_json doc;
    doc["n_states"] = q.n_states();
    doc["n_actions"] = q.n_actions();
    doc["values"] = std::vector<double>(q.values().begin(), q.values().end());
    return doc.dump() + "\n";
}

QTable qtable_from_json(std::string_view text) {
    const auto doc = parse_object(text);
    return QTable(required<std::size_t>(doc, "n_states"), required<std::size_t>(doc, "n_actions"),
                  required<std::vector<double>>(doc, "values"));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

void save_mdp(const Mdp& mdp, const std::filesystem::path& path) {
    write_text_file_atomic(path, mdp_to_json(mdp));
}

Mdp load_mdp(const std::filesystem::path& path) { return mdp_from_json(read_text_file(path)); }

void save_qtable(const QTable& q, const std::filesystem::path& path) {
    write_text_file_atomic(path, qtable_to_json(q));
}

QTable load_qtable(const std::filesystem::path& path) {
    return qtable_from_json(read_text_file(path));
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

} // namespace ttql
