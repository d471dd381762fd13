#pragma once

#include <array>
#include <string_view>
#include <utility>

namespace extscan::tables {

/// Catalog of the API permissions an extension can declare, one slot per
/// name in the permission feature family. Versioned copy lives in
/// data/permissions.txt; a unit test keeps the two in sync.
inline constexpr std::array<std::string_view, 70> kPermissionCatalog = {
    "accessibilityFeatures.modify",
    "accessibilityFeatures.read",
    "activeTab",
    "alarms",
    "audio",
    "background",
    "bookmarks",
    "browsingData",
    "certificateProvider",
    "clipboardRead",
    "clipboardWrite",
    "contentSettings",
    "contextMenus",
    "cookies",
    "debugger",
    "declarativeContent",
    "declarativeNetRequest",
    "declarativeNetRequestFeedback",
    "declarativeNetRequestWithHostAccess",
    "desktopCapture",
    "documentScan",
    "downloads",
    "downloads.open",
    "downloads.ui",
    "favicon",
    "fileBrowserHandler",
    "fileSystemProvider",
    "fontSettings",
    "gcm",
    "geolocation",
    "history",
    "identity",
    "identity.email",
    "idle",
    "loginState",
    "management",
    "nativeMessaging",
    "notifications",
    "offscreen",
    "pageCapture",
    "platformKeys",
    "power",
    "printerProvider",
    "printing",
    "printingMetrics",
    "privacy",
    "processes",
    "proxy",
    "readingList",
    "runtime",
    "scripting",
    "search",
    "sessions",
    "sidePanel",
    "storage",
    "system.cpu",
    "system.display",
    "system.memory",
    "system.storage",
    "tabCapture",
    "tabGroups",
    "tabs",
    "topSites",
    "tts",
    "ttsEngine",
    "unlimitedStorage",
    "vpnProvider",
    "wallpaper",
    "webNavigation",
    "webRequest",
};

/// English stop words. Verb families (be/do/have) are deliberately absent
/// so their forms survive into lemmatization.
inline constexpr std::array<std::string_view, 160> kStopWords = {
    "a",         "about",      "above",     "after",      "again",
    "against",   "all",        "almost",    "also",       "although",
    "among",     "an",         "and",       "another",    "any",
    "anyone",    "anything",   "as",        "at",         "because",
    "before",    "behind",     "below",     "between",    "beyond",
    "both",      "but",        "by",        "can",        "cannot",
    "could",     "down",       "during",    "each",       "either",
    "else",      "enough",     "etc",       "ever",       "every",
    "everyone",  "everything", "few",       "for",        "from",
    "further",   "he",         "her",       "here",       "hers",
    "herself",   "him",        "himself",   "his",        "how",
    "however",   "i",          "if",        "in",         "into",
    "it",        "its",        "itself",    "just",       "least",
    "less",      "many",       "may",       "me",         "might",
    "mine",      "more",       "most",      "much",       "must",
    "my",        "myself",     "neither",   "no",         "nobody",
    "none",      "nor",        "not",       "now",        "of",
    "off",       "on",         "once",      "only",       "onto",
    "or",        "other",      "others",    "our",        "ours",
    "ourselves", "out",        "over",      "own",        "per",
    "perhaps",   "rather",     "shall",     "she",        "should",
    "since",     "so",         "some",      "somebody",   "someone",
    "something", "such",       "than",      "that",       "the",
    "their",     "theirs",     "them",      "themselves", "then",
    "there",     "these",      "they",      "this",       "those",
    "through",   "thus",       "to",        "too",        "toward",
    "towards",   "under",      "until",     "up",         "upon",
    "us",        "very",       "we",        "what",       "when",
    "where",     "whether",    "which",     "while",      "who",
    "whom",      "whose",      "why",       "will",       "with",
    "within",    "without",    "would",     "yet",        "you",
    "your",      "yours",      "yourself",  "yourselves", "via",
};

/// Irregular lemma table applied before the suffix rules. Values must be
/// fixed points of the lemmatizer (enforced by test) so that repeated
/// normalization is stable.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 276>
    kLemmaTable = {{
        {"am", "be"},          {"are", "be"},         {"been", "be"},
        {"being", "be"},       {"is", "be"},          {"was", "be"},
        {"were", "be"},        {"did", "do"},         {"does", "do"},
        {"doing", "do"},       {"done", "do"},        {"had", "have"},
        {"has", "have"},       {"having", "have"},    {"goes", "go"},
        {"going", "go"},       {"gone", "go"},        {"went", "go"},
        {"said", "say"},       {"saying", "say"},     {"says", "say"},
        {"gets", "get"},       {"got", "get"},        {"gotten", "get"},
        {"made", "make"},      {"making", "make"},    {"knew", "know"},
        {"known", "know"},     {"thought", "think"},  {"taken", "take"},
        {"taking", "take"},    {"took", "take"},      {"saw", "see"},
        {"seeing", "see"},     {"seen", "see"},       {"came", "come"},
        {"coming", "come"},    {"used", "use"},       {"uses", "use"},
        {"using", "use"},      {"found", "find"},     {"gave", "give"},
        {"given", "give"},     {"giving", "give"},    {"told", "tell"},
        {"became", "become"},  {"leaving", "leave"},  {"left", "leave"},
        {"felt", "feel"},      {"putting", "put"},    {"meant", "mean"},
        {"kept", "keep"},      {"began", "begin"},    {"begun", "begin"},
        {"shown", "show"},     {"heard", "hear"},     {"moved", "move"},
        {"moving", "move"},    {"liked", "like"},     {"liking", "like"},
        {"lived", "live"},     {"living", "live"},    {"brought", "bring"},
        {"writing", "write"},  {"written", "write"},  {"wrote", "write"},
        {"sat", "sit"},        {"stood", "stand"},    {"losing", "lose"},
        {"lost", "lose"},      {"paid", "pay"},       {"met", "meet"},
        {"setting", "set"},    {"led", "lead"},       {"understood", "understand"},
        {"spoke", "speak"},    {"spoken", "speak"},   {"spent", "spend"},
        {"grew", "grow"},      {"grown", "grow"},     {"won", "win"},
        {"winning", "win"},    {"taught", "teach"},   {"bought", "buy"},
        {"died", "die"},       {"dying", "die"},      {"sent", "send"},
        {"built", "build"},    {"fell", "fall"},      {"fallen", "fall"},
        {"sold", "sell"},      {"broke", "break"},    {"broken", "break"},
        {"held", "hold"},      {"ran", "run"},        {"running", "run"},
        {"ate", "eat"},        {"eaten", "eat"},      {"driven", "drive"},
        {"driving", "drive"},  {"drove", "drive"},    {"flew", "fly"},
        {"flown", "fly"},      {"forgot", "forget"},  {"forgotten", "forget"},
        {"chose", "choose"},   {"chosen", "choose"},  {"choosing", "choose"},
        {"risen", "rise"},     {"rising", "rise"},    {"rose", "rise"},
        {"dealt", "deal"},     {"sought", "seek"},    {"threw", "throw"},
        {"thrown", "throw"},   {"caught", "catch"},   {"drawn", "draw"},
        {"drew", "draw"},      {"wore", "wear"},      {"worn", "wear"},
        {"slept", "sleep"},    {"fought", "fight"},   {"lain", "lie"},
        {"lying", "lie"},      {"swam", "swim"},      {"swum", "swim"},
        {"sang", "sing"},      {"sung", "sing"},      {"drank", "drink"},
        {"drunk", "drink"},    {"ridden", "ride"},    {"riding", "ride"},
        {"rode", "ride"},      {"shaken", "shake"},   {"shaking", "shake"},
        {"shook", "shake"},    {"stole", "steal"},    {"stolen", "steal"},
        {"hid", "hide"},       {"hidden", "hide"},    {"hiding", "hide"},
        {"bit", "bite"},       {"biting", "bite"},    {"bitten", "bite"},
        {"blew", "blow"},      {"blown", "blow"},     {"froze", "freeze"},
        {"frozen", "freeze"},  {"waking", "wake"},    {"woke", "wake"},
        {"woken", "wake"},     {"swore", "swear"},    {"sworn", "swear"},
        {"tore", "tear"},      {"torn", "tear"},      {"beaten", "beat"},
        {"bent", "bend"},      {"bound", "bind"},     {"burnt", "burn"},
        {"dug", "dig"},        {"fed", "feed"},       {"fled", "flee"},
        {"hung", "hang"},      {"laid", "lay"},       {"lent", "lend"},
        {"lit", "light"},      {"shone", "shine"},    {"shot", "shoot"},
        {"slid", "slide"},     {"sliding", "slide"},  {"sprang", "spring"},
        {"sprung", "spring"},  {"stuck", "stick"},    {"stung", "sting"},
        {"struck", "strike"},  {"swung", "swing"},    {"wound", "wind"},
        {"children", "child"}, {"men", "man"},        {"women", "woman"},
        {"feet", "foot"},      {"teeth", "tooth"},    {"mice", "mouse"},
        {"geese", "goose"},    {"people", "person"},  {"lives", "life"},
        {"leaves", "leaf"},    {"knives", "knife"},   {"wives", "wife"},
        {"wolves", "wolf"},    {"halves", "half"},    {"shelves", "shelf"},
        {"loaves", "loaf"},    {"thieves", "thief"},  {"criteria", "criterion"},
        {"phenomena", "phenomenon"},                  {"analyses", "analysis"},
        {"indices", "index"},  {"matrices", "matrix"},{"vertices", "vertex"},
        {"appendices", "appendix"},                   {"oxen", "ox"},
        {"better", "good"},    {"best", "good"},      {"worse", "bad"},
        {"worst", "bad"},      {"farther", "far"},    {"elder", "old"},
        {"eldest", "old"},     {"added", "add"},      {"adding", "add"},
        {"rated", "rate"},     {"rating", "rate"},    {"ratings", "rate"},
        {"loved", "love"},     {"loving", "love"},    {"saved", "save"},
        {"saving", "save"},    {"shared", "share"},   {"sharing", "share"},
        {"named", "name"},     {"naming", "name"},    {"noted", "note"},
        {"browsed", "browse"}, {"browsing", "browse"},{"cached", "cache"},
        {"caching", "cache"},  {"placed", "place"},   {"placing", "place"},
        {"parsed", "parse"},   {"parsing", "parse"},  {"stored", "store"},
        {"storing", "store"},  {"updated", "update"}, {"updating", "update"},
        {"created", "create"}, {"creating", "create"},{"deleted", "delete"},
        {"deleting", "delete"},{"removed", "remove"}, {"removing", "remove"},
        {"managed", "manage"}, {"managing", "manage"},{"enabled", "enable"},
        {"enabling", "enable"},{"disabled", "disable"},
        {"disabling", "disable"},                     {"required", "require"},
        {"requiring", "require"},                     {"included", "include"},
        {"including", "include"},                     {"provided", "provide"},
        {"providing", "provide"},                     {"improved", "improve"},
        {"improving", "improve"},                     {"received", "receive"},
        {"receiving", "receive"},                     {"replaced", "replace"},
        {"replacing", "replace"},                     {"released", "release"},
        {"releasing", "release"},                     {"featured", "feature"},
        {"featuring", "feature"},                     {"changed", "change"},
        {"changing", "change"},                       {"continued", "continue"},
        {"continuing", "continue"},                   {"decided", "decide"},
        {"deciding", "decide"},                       {"raised", "raise"},
        {"raising", "raise"},                         {"served", "serve"},
        {"serving", "serve"},                         {"believed", "believe"},
        {"believing", "believe"},                     {"learnt", "learn"},
    }};

}  // namespace extscan::tables
