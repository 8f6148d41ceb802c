// Canonical XML form of publication metadata. Element names, including the
// AUDIANCE and RELPLICATION_PROTECTION spellings, are kept as peers expect
// them; see docs/metadata.md for the schema.

#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "appraide/profile.hpp"

namespace appraide::profile {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kAttr = "<xmlattr>";

std::string escape(std::string_view text, bool attribute) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"':
                if (attribute) {
                    out += "&quot;";
                    break;
                }
                [[fallthrough]];
            default: out.push_back(c);
        }
    }
    return out;
}

std::string owner_attribute_name(Role role) {
    return role == Role::Apprenant ? "ID_Apprenant" : "ID_Enseignant";
}

std::string_view audience_type(const AudienceSpec& audience) {
    struct Visitor {
        std::string_view operator()(const MeOnly&) const { return "Moi-seulement"; }
        std::string_view operator()(const ClassAudience&) const { return "Classe de Connexion"; }
        std::string_view operator()(const PersonList&) const { return "Liste de personnes"; }
        std::string_view operator()(const Public&) const { return "Public"; }
    };
    return std::visit(Visitor{}, audience);
}

void write_list(std::ostringstream& out, const std::string& element, const UserSet& users,
                const std::string& indent) {
    out << indent << "<" << element << ">\n";
    for (const auto& user : users) {
        out << indent << "  <USER_ID>" << escape(user.str(), false) << "</USER_ID>\n";
    }
    out << indent << "</" << element << ">\n";
}

[[noreturn]] void malformed(const std::string& element, const std::string& why) {
    throw MetadataError(MetadataError::Kind::MalformedDocument, element,
                        "malformed metadata document at <" + element + ">: " + why);
}

[[noreturn]] void unknown(const std::string& element) {
    throw MetadataError(MetadataError::Kind::UnknownElement, element, "unknown metadata element <" + element + ">");
}

std::string text_of(const pt::ptree& node) {
    return boost::algorithm::trim_copy(node.data());
}

std::optional<std::string> attribute(const pt::ptree& node, const std::string& name) {
    const auto attrs = node.get_child_optional(pt::ptree::path_type(std::string(kAttr), '\0'));
    if (!attrs) {
        return std::nullopt;
    }
    const auto value = attrs->get_optional<std::string>(pt::ptree::path_type(name, '\0'));
    if (!value) {
        return std::nullopt;
    }
    return *value;
}

bool is_markup_child(const std::string& name) {
    return name == kAttr || name == "<xmlcomment>";
}

UserSet read_user_list(const pt::ptree& list, const std::string& element) {
    UserSet users;
    for (const auto& [name, child] : list) {
        if (is_markup_child(name)) {
            continue;
        }
        if (name != "USER_ID") {
            unknown(name);
        }
        try {
            users.insert(UserId::parse(text_of(child)));
        } catch (const ProfileError& e) {
            malformed(element, e.what());
        }
    }
    return users;
}

UserId read_principal(const pt::ptree& node, const std::string& element) {
    UserId id;
    std::optional<std::string> number = attribute(node, "ID_Apprenant");
    id.role = Role::Apprenant;
    if (!number) {
        number = attribute(node, "ID_Enseignant");
        id.role = Role::Enseignant;
    }
    if (!number) {
        malformed(element, "missing ID_Apprenant/ID_Enseignant attribute");
    }
    try {
        id.number = UserId::parse(std::string(to_string(id.role)) + "_" + *number).number;
    } catch (const ProfileError& e) {
        malformed(element, e.what());
    }
    id.pseudonym = attribute(node, "pseudonym").value_or("");
    return id;
}

std::uint64_t read_u64(const std::string& text, const std::string& element) {
    try {
        std::size_t used = 0;
        const auto value = std::stoull(text, &used);
        if (used != text.size()) {
            malformed(element, "trailing characters in integer");
        }
        return value;
    } catch (const std::logic_error&) {
        malformed(element, "not an integer");
    }
}

AudienceSpec read_audience(const pt::ptree& node) {
    const auto type = attribute(node, "type");
    if (!type) {
        malformed("AUDIANCE", "missing type attribute");
    }
    std::optional<UserSet> list;
    for (const auto& [name, child] : node) {
        if (is_markup_child(name)) {
            continue;
        }
        if (name != "LISTE") {
            unknown(name);
        }
        list = read_user_list(child, "LISTE");
    }
    if (*type == "Moi-seulement") {
        return MeOnly{};
    }
    if (*type == "Public") {
        return Public{};
    }
    if (*type == "Classe de Connexion") {
        const auto id = attribute(node, "Audiance_ID");
        if (!id) {
            malformed("AUDIANCE", "class audience without Audiance_ID");
        }
        return ClassAudience{*id, attribute(node, "name").value_or(""), list.value_or(UserSet{})};
    }
    if (*type == "Liste de personnes") {
        if (!list || list->empty()) {
            malformed("AUDIANCE", "person list audience needs a non-empty LISTE");
        }
        return PersonList{*list};
    }
    malformed("AUDIANCE", "unknown audience type '" + *type + "'");
}

AccessRights read_rights(const pt::ptree& node) {
    AccessRights rights;
    bool saw_protection = false;
    bool saw_distribution = false;
    for (const auto& [name, child] : node) {
        if (is_markup_child(name)) {
            continue;
        }
        const std::string value = text_of(child);
        if (name == "ACCESS") {
            continue;
        }
        if (name == "RELPLICATION_PROTECTION") {
            saw_protection = true;
            if (value == "Clair") {
                rights.replication_protection = Protection::Clear;
            } else if (value == "Crypté") {
                rights.replication_protection = Protection::Encrypted;
            } else {
                malformed(name, "expected Clair or Crypté");
            }
        } else if (name == "distribution") {
            saw_distribution = true;
            if (value == "Non") {
                rights.distribution = Distribution::None;
            } else if (value == "Oui") {
                rights.distribution = Distribution::Allowed;
            } else if (value == "Restreinte") {
                rights.distribution = Distribution::Restricted;
            } else {
                malformed(name, "expected Non, Oui or Restreinte");
            }
        } else if (name == "DISTRIBUTION_LISTE") {
            rights.restricted_to = read_user_list(child, name);
        } else if (name == "DUPLICATION_AUTORISATION") {
            if (value == "Oui") {
                rights.duplication_authorized = true;
            } else if (value == "Non") {
                rights.duplication_authorized = false;
            } else {
                malformed(name, "expected Oui or Non");
            }
        } else {
            unknown(name);
        }
    }
    if (!saw_protection) {
        malformed("RELPLICATION_PROTECTION", "element missing");
    }
    if (!saw_distribution) {
        malformed("distribution", "element missing");
    }
    return rights;
}

Origin read_origin(const pt::ptree& node) {
    Origin origin;
    origin.original_owner = read_principal(node, "VIA");
    const auto cid = attribute(node, "Content_ID");
    if (!cid) {
        malformed("VIA", "missing Content_ID attribute");
    }
    origin.original_content_id = read_u64(*cid, "VIA");
    const std::string scope = attribute(node, "scope").value_or("");
    UserSet list;
    for (const auto& [name, child] : node) {
        if (is_markup_child(name)) {
            continue;
        }
        if (name != "LISTE") {
            unknown(name);
        }
        list = read_user_list(child, "LISTE");
    }
    if (scope == "liste") {
        origin.allowed = list;
    } else if (scope != "tous") {
        malformed("VIA", "scope must be liste or tous");
    }
    return origin;
}

}  // namespace

std::string serialize_metadata(const PublicationMetadata& m) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<PUBLICATION>\n";
    out << "  <OWNER " << owner_attribute_name(m.owner.role) << "=\"" << m.owner.number << "\" pseudonym=\""
        << escape(m.owner.pseudonym, true) << "\"/>\n";
    out << "  <ID_TypeContenu>" << escape(to_string(m.publication_type), false) << "</ID_TypeContenu>\n";
    out << "  <Content_ID>" << m.content_id << "</Content_ID>\n";
    out << "  <Science>" << escape(m.science, false) << "</Science>\n";
    out << "  <Level>" << escape(to_string(m.level), false) << "</Level>\n";

    out << "  <AUDIANCE";
    if (const auto* cls = std::get_if<ClassAudience>(&m.audience); cls && !cls->name.empty()) {
        out << " name=\"" << escape(cls->name, true) << "\"";
    }
    out << " type=\"" << audience_type(m.audience) << "\"";
    if (const auto* cls = std::get_if<ClassAudience>(&m.audience)) {
        out << " Audiance_ID=\"" << escape(cls->class_id, true) << "\"";
    }
    const UserSet ids = audience_ids(m.audience);
    if (std::holds_alternative<ClassAudience>(m.audience) || std::holds_alternative<PersonList>(m.audience)) {
        out << ">\n";
        write_list(out, "LISTE", ids, "    ");
        out << "  </AUDIANCE>\n";
    } else {
        out << "/>\n";
    }

    out << "  <RIGHTS>\n";
    out << "    <ACCESS/>\n";
    out << "    <RELPLICATION_PROTECTION>"
        << (m.rights.replication_protection == Protection::Clear ? "Clair" : "Crypté")
        << "</RELPLICATION_PROTECTION>\n";
    const char* distribution = m.rights.distribution == Distribution::None      ? "Non"
                               : m.rights.distribution == Distribution::Allowed ? "Oui"
                                                                                : "Restreinte";
    out << "    <distribution>" << distribution << "</distribution>\n";
    if (m.rights.distribution == Distribution::Restricted) {
        write_list(out, "DISTRIBUTION_LISTE", m.rights.restricted_to, "    ");
    }
    out << "    <DUPLICATION_AUTORISATION>" << (m.rights.duplication_authorized ? "Oui" : "Non")
        << "</DUPLICATION_AUTORISATION>\n";
    out << "  </RIGHTS>\n";

    if (m.via) {
        out << "  <VIA " << owner_attribute_name(m.via->original_owner.role) << "=\"" << m.via->original_owner.number
            << "\" pseudonym=\"" << escape(m.via->original_owner.pseudonym, true) << "\" Content_ID=\""
            << m.via->original_content_id << "\" scope=\"" << (m.via->allowed ? "liste" : "tous") << "\"";
        if (m.via->allowed) {
            out << ">\n";
            write_list(out, "LISTE", *m.via->allowed, "    ");
            out << "  </VIA>\n";
        } else {
            out << "/>\n";
        }
    }
    out << "</PUBLICATION>\n";
    return out.str();
}

PublicationMetadata parse_metadata(std::string_view xml) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(xml)};
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        malformed("document", e.message());
    }
    std::optional<pt::ptree> root;
    for (const auto& [name, child] : tree) {
        if (name == "<xmlcomment>") {
            continue;
        }
        if (name != "PUBLICATION" || root) {
            if (name != "PUBLICATION") {
                unknown(name);
            }
            malformed(name, "more than one root element");
        }
        root = child;
    }
    if (!root) {
        malformed("PUBLICATION", "missing root element");
    }

    PublicationMetadata m;
    bool owner = false;
    bool type = false;
    bool content = false;
    bool science = false;
    bool level = false;
    bool audience = false;
    bool rights = false;
    for (const auto& [name, child] : *root) {
        if (is_markup_child(name)) {
            continue;
        }
        if (name == "OWNER") {
            m.owner = read_principal(child, name);
            owner = true;
        } else if (name == "ID_TypeContenu") {
            try {
                m.publication_type = parse_publication_type(text_of(child));
            } catch (const ProfileError& e) {
                malformed(name, e.what());
            }
            type = true;
        } else if (name == "Content_ID") {
            m.content_id = read_u64(text_of(child), name);
            content = true;
        } else if (name == "Science") {
            m.science = text_of(child);
            science = true;
        } else if (name == "Level") {
            try {
                m.level = parse_level(text_of(child));
            } catch (const ProfileError& e) {
                malformed(name, e.what());
            }
            level = true;
        } else if (name == "AUDIANCE") {
            m.audience = read_audience(child);
            audience = true;
        } else if (name == "RIGHTS") {
            m.rights = read_rights(child);
            rights = true;
        } else if (name == "VIA") {
            m.via = read_origin(child);
        } else {
            unknown(name);
        }
    }
    const std::pair<bool, const char*> required[] = {
        {owner, "OWNER"},     {type, "ID_TypeContenu"}, {content, "Content_ID"}, {science, "Science"},
        {level, "Level"},     {audience, "AUDIANCE"},   {rights, "RIGHTS"},
    };
    for (const auto& [present, element] : required) {
        if (!present) {
            malformed(element, "required element missing");
        }
    }
    return m;
}

}  // namespace appraide::profile
