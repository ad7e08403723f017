#pragma once

// Grammatical gender of common German nouns. Small on purpose; real runs
// should bring their own annotations.

#include <string_view>

namespace contrapro::lexicon {

struct NounGender {
  std::string_view noun;
  char gender;  // 'm', 'f' or 'n'
};

inline constexpr NounGender kGermanNouns[] = {
    {"Abend", 'm'},     {"Affe", 'm'},       {"Angst", 'f'},      {"Antwort", 'f'},    {"Apfel", 'm'},
    {"Arbeit", 'f'},    {"Arm", 'm'},        {"Arzt", 'm'},       {"Auge", 'n'},       {"Auto", 'n'},
    {"Bad", 'n'},       {"Bahn", 'f'},       {"Ball", 'm'},       {"Bank", 'f'},       {"Bauch", 'm'},
    {"Baum", 'm'},      {"Berg", 'm'},       {"Bett", 'n'},       {"Bild", 'n'},       {"Birne", 'f'},
    {"Blatt", 'n'},     {"Blume", 'f'},      {"Blut", 'n'},       {"Boden", 'm'},      {"Boot", 'n'},
    {"Bombe", 'f'},     {"Brief", 'm'},      {"Brille", 'f'},     {"Brot", 'n'},       {"Brücke", 'f'},
    {"Bruder", 'm'},    {"Buch", 'n'},       {"Burg", 'f'},       {"Büro", 'n'},       {"Dach", 'n'},
    {"Decke", 'f'},     {"Ding", 'n'},       {"Dorf", 'n'},       {"Dose", 'f'},       {"Eimer", 'm'},
    {"Eis", 'n'},       {"Feder", 'f'},      {"Fahrrad", 'n'},    {"Familie", 'f'},    {"Farbe", 'f'},
    {"Fenster", 'n'},   {"Feuer", 'n'},      {"Film", 'm'},       {"Firma", 'f'},      {"Fisch", 'm'},
    {"Flasche", 'f'},   {"Fledermaus", 'f'}, {"Fleisch", 'n'},    {"Flugzeug", 'n'},   {"Fluss", 'm'},
    {"Foto", 'n'},      {"Frage", 'f'},      {"Frau", 'f'},       {"Freund", 'm'},     {"Gabel", 'f'},
    {"Garten", 'm'},    {"Gebäude", 'n'},    {"Geld", 'n'},       {"Geschichte", 'f'}, {"Gesicht", 'n'},
    {"Glas", 'n'},      {"Glocke", 'f'},     {"Gras", 'n'},       {"Hand", 'f'},       {"Handy", 'n'},
    {"Haar", 'n'},      {"Haus", 'n'},       {"Heft", 'n'},       {"Hemd", 'n'},       {"Herz", 'n'},
    {"Himmel", 'm'},    {"Hose", 'f'},       {"Hotel", 'n'},      {"Hund", 'm'},       {"Hut", 'm'},
    {"Idee", 'f'},      {"Insel", 'f'},      {"Jacke", 'f'},      {"Junge", 'm'},      {"Kaffee", 'm'},
    {"Kamera", 'f'},    {"Karte", 'f'},      {"Kartoffel", 'f'},  {"Käse", 'm'},       {"Katze", 'f'},
    {"Kerze", 'f'},     {"Kette", 'f'},      {"Kind", 'n'},       {"Kirche", 'f'},     {"Kiste", 'f'},
    {"Klavier", 'n'},   {"Kleid", 'n'},      {"Koffer", 'm'},     {"Kopf", 'm'},       {"Korb", 'm'},
    {"Krieg", 'm'},     {"Krone", 'f'},      {"Küche", 'f'},      {"Kuchen", 'm'},     {"Kugel", 'f'},
    {"Kuh", 'f'},       {"Lampe", 'f'},      {"Land", 'n'},       {"Leiter", 'f'},     {"Licht", 'n'},
    {"Liebe", 'f'},     {"Lied", 'n'},       {"Löffel", 'm'},     {"Luft", 'f'},       {"Mädchen", 'n'},
    {"Mann", 'm'},      {"Mantel", 'm'},     {"Maschine", 'f'},   {"Maus", 'f'},       {"Meer", 'n'},
    {"Messer", 'n'},    {"Milch", 'f'},      {"Mond", 'm'},       {"Motor", 'm'},      {"Münze", 'f'},
    {"Musik", 'f'},     {"Mutter", 'f'},     {"Nachricht", 'f'},  {"Nacht", 'f'},      {"Nadel", 'f'},
    {"Name", 'm'},      {"Nase", 'f'},       {"Ofen", 'm'},       {"Ohr", 'n'},        {"Papier", 'n'},
    {"Pferd", 'n'},     {"Pflanze", 'f'},    {"Pistole", 'f'},    {"Platz", 'm'},      {"Polizei", 'f'},
    {"Problem", 'n'},   {"Puppe", 'f'},      {"Rad", 'n'},        {"Radio", 'n'},      {"Regel", 'f'},
    {"Regen", 'm'},     {"Reise", 'f'},      {"Ring", 'm'},       {"Rose", 'f'},       {"Sache", 'f'},
    {"Schachtel", 'f'}, {"Schiff", 'n'},     {"Schlange", 'f'},   {"Schloss", 'n'},    {"Schlüssel", 'm'},
    {"Schnee", 'm'},    {"Schrank", 'm'},    {"Schuh", 'm'},      {"Schule", 'f'},     {"Schwester", 'f'},
    {"See", 'm'},       {"Seife", 'f'},      {"Seite", 'f'},      {"Sonne", 'f'},      {"Spiegel", 'm'},
    {"Spiel", 'n'},     {"Stadt", 'f'},      {"Stein", 'm'},      {"Stern", 'm'},      {"Stimme", 'f'},
    {"Straße", 'f'},    {"Stuhl", 'm'},      {"Stunde", 'f'},     {"Suppe", 'f'},      {"Tasche", 'f'},
    {"Tasse", 'f'},     {"Telefon", 'n'},    {"Teller", 'm'},     {"Tier", 'n'},       {"Tisch", 'm'},
    {"Tochter", 'f'},   {"Tor", 'n'},        {"Tür", 'f'},        {"Turm", 'm'},       {"Uhr", 'f'},
    {"Vase", 'f'},      {"Vater", 'm'},      {"Vogel", 'm'},      {"Waffe", 'f'},      {"Wagen", 'm'},
    {"Wahrheit", 'f'},  {"Wald", 'm'},       {"Wand", 'f'},       {"Wasser", 'n'},     {"Weg", 'm'},
    {"Welt", 'f'},      {"Wind", 'm'},       {"Wohnung", 'f'},    {"Wolke", 'f'},      {"Wort", 'n'},
    {"Zahl", 'f'},      {"Zahn", 'm'},       {"Zeit", 'f'},       {"Zeitung", 'f'},    {"Zimmer", 'n'},
    {"Zug", 'm'},
};

}  // namespace contrapro::lexicon
