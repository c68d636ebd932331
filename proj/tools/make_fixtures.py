#!/usr/bin/env python3
"""Writes the bundled app-model fixtures into fixtures/.

Every dependency-gated label starts with "gated_" so tests can select them.
Run from anywhere: python3 tools/make_fixtures.py
"""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


class App:
    def __init__(self, app_id, entry):
        self.doc = {"app_id": app_id, "entry_page": entry, "variables": [], "pages": [],
                    "transitions": [], "flaky_edges": []}
        self.pages = {}

    def var(self, name, type_="bool", initial=None, values=None, max_=None, global_=False):
        v = {"name": name, "type": type_}
        if values is not None:
            v["values"] = values
        if max_ is not None:
            v["max"] = max_
        if initial is not None:
            v["initial"] = initial
        if global_:
            v["scope"] = "global"
        self.doc["variables"].append(v)

    def page(self, pid, activity, description, widgets):
        p = {"id": pid, "activity": activity, "description": description, "widgets": widgets}
        self.doc["pages"].append(p)
        self.pages[pid] = p
        return p

    def t(self, source, widget, target=None, labels=(), guard=None, effects=None, event="tap", arg=None):
        tid = f"{source}.{widget}.{sum(1 for t in self.doc['transitions'] if t['source'] == source and t['widget'] == widget)}"
        t = {"id": tid, "source": source, "widget": widget, "event": event, "target": target or source,
             "labels": list(labels)}
        if guard:
            t["guard"] = guard
        if effects:
            t["effects"] = effects
        if arg is not None:
            t["arg"] = arg
        self.doc["transitions"].append(t)
        return tid

    def flaky(self, tid, probability, alternate):
        self.doc["flaky_edges"].append({"transition": tid, "probability": probability, "alternate": alternate})

    def write(self, name):
        OUT.mkdir(exist_ok=True)
        (OUT / name).write_text(json.dumps(self.doc, indent=2) + "\n")


def w(wid, kind="button", **kw):
    d = {"id": wid, "kind": kind}
    d.update(kw)
    return d


def filler(app, pid, names, live=(), prefix=""):
    """Inert labels plus label-emitting self-loop buttons."""
    widgets = []
    for n in names:
        if n in live:
            widgets.append(w(f"{pid}_{n}"))
            app.t(pid, f"{pid}_{n}", labels=[f"{prefix}{pid}.{n}"])
        else:
            widgets.append(w(f"{pid}_{n}", "label", text=n.replace("_", " ")))
    return widgets


def nav(app, source, widget, target, label=None, prefix=""):
    return app.t(source, widget, target, labels=[label or f"{prefix}{source}.{widget}"])


def leaf(app, pid, activity, description, parent, names, live=(), prefix=""):
    """A page of filler content with a back button to `parent`. Pages only
    reachable after a state mutation pass prefix="gated_"."""
    widgets = filler(app, pid, names, live, prefix) + [w(f"{pid}_back")]
    app.page(pid, activity, description, widgets)
    nav(app, pid, f"{pid}_back", parent, prefix=prefix)


def hub(app, pid, activity, description, parent, subpages, names=("heading", "intro", "status"), live=("intro",)):
    """A page linking to leaf `subpages` (each with three filler widgets) plus a back button."""
    widgets = [w(f"open_{sub}") for sub in subpages] + filler(app, pid, names, live) + [w(f"{pid}_back")]
    app.page(pid, activity, description, widgets)
    for sub in subpages:
        nav(app, pid, f"open_{sub}", sub)
        leaf(app, sub, activity, f"{sub.replace('_', ' ')} screen", pid, ["title", "body", "action"], live=("action",))
    nav(app, pid, f"{pid}_back", parent)


# ---------------------------------------------------------------------------
# case 1: a global format setting gates player behavior (A -> B -> A unlock)
# ---------------------------------------------------------------------------
def case1():
    app = App("case1_settings_player", "home")
    app.var("format", "enum", "MP4", values=["MP4", "WebM"], global_=True)
    F = ["title", "banner", "tip", "footer", "news", "legal"]

    sections = {"library": ["playlists", "watch_later", "liked"], "downloads": ["active", "finished", "storage"],
                "subscriptions": ["channels_list", "new_uploads", "manage"],
                "notifications": ["unread", "mentions", "archive"], "profile": ["account_info", "devices", "sign_out"]}
    app.page("home", "MainActivity", "start screen with shortcuts to videos, search, trending, library sections and the menu",
             [w("open_videos"), w("open_search"), w("open_trending"), w("open_menu")]
             + [w(f"open_{sec}") for sec in sections]
             + filler(app, "home", F, live=("banner", "news")))
    nav(app, "home", "open_videos", "videos")
    nav(app, "home", "open_search", "search")
    nav(app, "home", "open_trending", "trending")
    nav(app, "home", "open_menu", "menu")
    for sec, subs in sections.items():
        nav(app, "home", f"open_{sec}", sec)
        hub(app, sec, "LibraryActivity", f"{sec} overview", "home", subs)

    vids = [w(f"video_{i}") for i in range(4)]
    app.page("videos", "MainActivity", "list of videos", vids + filler(app, "videos", ["heading", "sort", "count", "hint"], live=("sort",)) + [w("videos_back")])
    for i in range(4):
        nav(app, "videos", f"video_{i}", "player", f"videos.open_{i}")
    nav(app, "videos", "videos_back", "home")

    controls = ["like", "dislike", "fullscreen", "speed", "quality", "captions", "loop", "cast"]
    player = [w("play_btn"), w("download_btn"), w("share_btn"), w("queue_btn"), w("open_comments"), w("open_related")]
    player += [w(f"{c}_btn") for c in controls]
    player.append(w("codec_badge", "label", visible="format == WebM", text="WebM"))
    player += filler(app, "player", ["title", "channel", "views", "likes", "duration", "description"], live=("likes",))
    player.append(w("player_back"))
    app.page("player", "PlayerActivity", "video player with play, download and share controls", player)
    app.t("player", "play_btn", labels=[f"gated_play_webm_{i}" for i in range(20)], guard="format == WebM")
    app.t("player", "play_btn", labels=["player.play_mp4"])
    app.t("player", "download_btn", labels=[f"gated_download_webm_{i}" for i in range(12)], guard="format == WebM")
    app.t("player", "download_btn", labels=["player.download_mp4"])
    app.t("player", "share_btn", labels=[f"gated_share_webm_{i}" for i in range(12)], guard="format == WebM")
    app.t("player", "share_btn", labels=["player.share_mp4"])
    app.t("player", "queue_btn", labels=["player.queue"])
    for c in controls:
        app.t("player", f"{c}_btn", labels=[f"player.{c}"])
    nav(app, "player", "open_comments", "comments")
    nav(app, "player", "open_related", "related")
    leaf(app, "related", "PlayerActivity", "related videos", "player", ["first", "second", "third"], live=("second",))
    nav(app, "player", "player_back", "videos")
    leaf(app, "comments", "PlayerActivity", "comment thread of the video", "player",
         ["first", "second", "third", "fourth"], live=("first",))

    leaf(app, "search", "MainActivity", "search screen", "home", ["box", "recent", "suggest", "clear"], live=("suggest",))
    leaf(app, "trending", "MainActivity", "trending videos", "home", ["top", "music", "gaming", "news"], live=("music", "gaming"))

    menu_extra = ["bookmarks", "statistics", "import_export", "tips"]
    app.page("menu", "MainActivity", "navigation menu",
             [w("open_history"), w("open_about")] + [w(f"open_{m}") for m in menu_extra] + [w("open_settings")]
             + filler(app, "menu", ["account", "help", "feedback", "version"], live=("help",)) + [w("menu_back")])
    nav(app, "menu", "open_history", "history")
    nav(app, "menu", "open_about", "about")
    for m in menu_extra:
        nav(app, "menu", f"open_{m}", m)
        leaf(app, m, "MainActivity", f"{m.replace('_', ' ')} screen", "menu", ["title", "body", "action"], live=("action",))
    nav(app, "menu", "open_settings", "settings")
    nav(app, "menu", "menu_back", "home")
    leaf(app, "history", "MainActivity", "watch history", "menu", ["today", "week", "older", "clear"], live=("clear",))
    leaf(app, "about", "AboutActivity", "about the app", "menu", ["licenses", "version", "website", "donate"], live=("licenses",))

    categories = ["notification_prefs", "content_prefs", "network_prefs", "backup_prefs", "privacy_prefs"]
    app.page("settings", "SettingsActivity", "settings categories",
             [w("open_appearance")] + [w(f"open_{c}") for c in categories] + [w("open_media")]
             + filler(app, "settings", ["general", "privacy", "updates", "debug"], live=("privacy",)) + [w("settings_back")])
    for c in categories:
        nav(app, "settings", f"open_{c}", c)
        leaf(app, c, "SettingsActivity", f"{c.replace('_', ' ')}", "settings", ["title", "body", "action"], live=("action",))
    nav(app, "settings", "open_appearance", "appearance")
    nav(app, "settings", "open_media", "media")
    nav(app, "settings", "settings_back", "menu")
    leaf(app, "appearance", "SettingsActivity", "theme and layout settings", "settings",
         ["theme", "font", "grid", "accent"], live=("theme",))
    app.page("media", "SettingsActivity", "video and audio settings with the default playback format",
             [w("format_choice", "radio_group", bind="format")]
             + filler(app, "media", ["resolution", "audio", "caption", "cache"], live=("resolution",)) + [w("media_back")])
    for value in ["MP4", "WebM"]:
        app.t("media", "format_choice", labels=[f"media.format_{value.lower()}"],
              effects=[{"var": "format", "set": value}], event="select", arg=value)
    nav(app, "media", "media_back", "settings")
    app.write("case1_settings_player.app.json")


# ---------------------------------------------------------------------------
# case 2: subscribing unlocks the feed items and group creation
# ---------------------------------------------------------------------------
def case2():
    app = App("case2_subscribe_feed", "home")
    app.var("subscribed", "bool", False)

    sections = {"trending": ["music", "gaming", "movies"], "library": ["playlists", "watch_later", "liked"],
                "downloads": ["active", "finished", "storage"], "notifications": ["unread", "mentions", "archive"],
                "profile": ["account_info", "devices", "sign_out"]}
    app.page("home", "MainActivity", "start screen with feed, groups, channels, library sections and menu tabs",
             [w("feed_tab"), w("groups_tab"), w("channels_tab"), w("open_menu")]
             + [w(f"open_{sec}") for sec in sections]
             + filler(app, "home", ["logo", "promo", "tip", "footer", "status"], live=("promo",)))
    nav(app, "home", "feed_tab", "feed")
    nav(app, "home", "groups_tab", "groups")
    nav(app, "home", "channels_tab", "channels")
    nav(app, "home", "open_menu", "menu")
    for sec, subs in sections.items():
        nav(app, "home", f"open_{sec}", sec)
        hub(app, sec, "LibraryActivity", f"{sec} overview", "home", subs)

    feed = [w(f"feed_item_{i}", "list_item", visible="subscribed") for i in range(4)]
    feed += [w("feed_empty_hint", "label", visible="!subscribed", text="subscribe to see videos"), w("feed_refresh")]
    feed += filler(app, "feed", ["heading", "filter", "sort", "count", "notice", "legend", "page", "info"], live=("filter",))
    feed.append(w("feed_back"))
    app.page("feed", "FeedActivity", "subscription feed listing new videos from subscribed channels", feed)
    for i in range(4):
        app.t("feed", f"feed_item_{i}", labels=[f"gated_feed_{i}_{j}" for j in range(96)])
    app.t("feed", "feed_refresh", labels=["feed.refresh"])
    nav(app, "feed", "feed_back", "home")

    app.page("groups", "FeedActivity", "channel groups",
             [w("new_group")] + filler(app, "groups", ["heading", "all", "music", "count"], live=("all",)) + [w("groups_back")])
    nav(app, "groups", "new_group", "group_create")
    nav(app, "groups", "groups_back", "home")
    app.page("group_create", "FeedActivity", "form to create a channel group",
             [w("group_name", "input"), w("create_group")]
             + filler(app, "group_create", ["heading", "icon", "hint", "rules"], live=("icon",)) + [w("group_create_back")])
    app.t("group_create", "group_name", labels=["group_create.name"], event="input")
    app.t("group_create", "create_group", "groups", labels=[f"gated_create_{j}" for j in range(388)], guard="subscribed")
    app.t("group_create", "create_group", labels=["group_create.denied"])
    nav(app, "group_create", "group_create_back", "groups")

    app.page("channels", "MainActivity", "channel directory",
             [w(f"channel_{i}") for i in range(3)] + filler(app, "channels", ["heading", "featured", "count"], live=("featured",))
             + [w("channels_back")])
    for i in range(3):
        nav(app, "channels", f"channel_{i}", "creator", f"channels.open_{i}")
    nav(app, "channels", "channels_back", "home")
    creator_tabs = ["playlists", "shorts", "community", "live", "channels", "store"]
    app.page("creator", "ChannelActivity", "channel page of a creator with a subscribe button",
             [w(f"creator_{t}") for t in creator_tabs[:3]] + [w("subscribe_btn", "switch", bind="subscribed")]
             + [w(f"creator_{t}") for t in creator_tabs[3:]] + [w("creator_videos")]
             + filler(app, "creator", ["name", "avatar", "about", "stats", "links"], live=("about",)) + [w("creator_back")])
    app.t("creator", "subscribe_btn", labels=["creator.subscribe"], effects=[{"var": "subscribed", "toggle": True}])
    app.t("creator", "creator_videos", labels=["creator.videos"])
    for t in creator_tabs:
        app.t("creator", f"creator_{t}", labels=[f"creator.{t}"])
    nav(app, "creator", "creator_back", "channels")

    menu_extra = ["bookmarks", "statistics", "import_export", "tips"]
    app.page("menu", "MainActivity", "navigation menu",
             [w("open_settings"), w("open_about")] + [w(f"open_{m}") for m in menu_extra]
             + filler(app, "menu", ["account", "help", "version"], live=("help",)) + [w("menu_back")])
    nav(app, "menu", "open_settings", "settings")
    nav(app, "menu", "open_about", "about")
    for m in menu_extra:
        nav(app, "menu", f"open_{m}", m)
        leaf(app, m, "MainActivity", f"{m.replace('_', ' ')} screen", "menu", ["title", "body", "action"], live=("action",))
    nav(app, "menu", "menu_back", "home")
    leaf(app, "settings", "SettingsActivity", "settings", "menu", ["general", "privacy", "updates", "debug"], live=("general",))
    leaf(app, "about", "AboutActivity", "about the app", "menu", ["licenses", "version", "website"], live=("licenses",))
    app.write("case2_subscribe_feed.app.json")


# ---------------------------------------------------------------------------
# cascade: enabling beta features reveals a lab page holding a second switch
# ---------------------------------------------------------------------------
def cascade():
    app = App("cascade_lab", "home")
    app.var("beta", "bool", False)
    app.var("experimental", "bool", False)

    app.page("home", "MainActivity", "start screen",
             [w("open_tools"), w("open_menu")] + filler(app, "home", ["logo", "promo", "tip", "footer"], live=("promo",)))
    nav(app, "home", "open_tools", "tools")
    nav(app, "home", "open_menu", "menu")

    app.page("tools", "ToolsActivity", "tools with a lab entry and an experiment runner",
             [w("run_experiment"), w("open_lab")]
             + filler(app, "tools", ["heading", "calc", "timer", "notes"], live=("calc", "timer")) + [w("tools_back")])
    app.t("tools", "run_experiment", labels=[f"gated_experiment_{i}" for i in range(10)], guard="experimental")
    app.t("tools", "run_experiment", labels=["tools.run_locked"])
    app.t("tools", "open_lab", "lab", labels=["gated_lab_open"], guard="beta")
    app.t("tools", "open_lab", labels=["tools.lab_locked"])
    nav(app, "tools", "tools_back", "home")

    app.page("lab", "ToolsActivity", "experimental lab with an experimental-mode switch",
             [w("experimental_switch", "switch", bind="experimental")]
             + filler(app, "lab", ["heading", "warning", "notes", "status"], live=("notes",), prefix="gated_") + [w("lab_back")])
    app.t("lab", "experimental_switch", labels=["gated_lab_toggle"], effects=[{"var": "experimental", "toggle": True}])
    nav(app, "lab", "lab_back", "tools", prefix="gated_")

    app.page("menu", "MainActivity", "navigation menu",
             [w("open_about"), w("open_settings")] + filler(app, "menu", ["account", "help", "version"], live=("help",))
             + [w("menu_back")])
    nav(app, "menu", "open_about", "about")
    nav(app, "menu", "open_settings", "settings")
    nav(app, "menu", "menu_back", "home")
    leaf(app, "about", "AboutActivity", "about the app", "menu", ["licenses", "version", "website"], live=("licenses",))
    app.page("settings", "SettingsActivity", "settings categories",
             [w("open_general"), w("open_advanced")] + filler(app, "settings", ["heading", "privacy", "updates"], live=("privacy",))
             + [w("settings_back")])
    nav(app, "settings", "open_general", "general")
    nav(app, "settings", "open_advanced", "advanced")
    nav(app, "settings", "settings_back", "menu")
    leaf(app, "general", "SettingsActivity", "general settings", "settings", ["language", "region", "units"], live=("language",))
    app.page("advanced", "SettingsActivity", "advanced settings with the beta features switch",
             [w("beta_switch", "switch", bind="beta")]
             + filler(app, "advanced", ["heading", "logging", "cache", "reset"], live=("logging",)) + [w("advanced_back")])
    app.t("advanced", "beta_switch", labels=["advanced.beta"], effects=[{"var": "beta", "toggle": True}])
    nav(app, "advanced", "advanced_back", "settings")
    app.write("cascade_lab.app.json")


# ---------------------------------------------------------------------------
# noise: flaky navigation, animated decorative widgets, one real dependency
# ---------------------------------------------------------------------------
def noise():
    app = App("noise_news", "home")
    app.var("offline", "bool", False)
    sections = ["world", "sports", "tech", "science", "culture", "travel"]

    app.page("home", "MainActivity", "news front page with section tabs",
             [w(f"tab_{s}") for s in sections] + [w("open_settings"), w("ticker", "switch", animated=True)]
             + filler(app, "home", ["logo", "date", "weather"], live=("weather",)))
    nav(app, "home", "open_settings", "settings")
    flaky_sources = {"sports", "science", "travel"}
    for s in sections:
        tid = nav(app, "home", f"tab_{s}", s, f"home.open_{s}")
        if s in flaky_sources:
            app.flaky(tid, 0.1, "interstitial")
    app.page("interstitial", "AdActivity", "full-screen advertisement with a close button",
             [w("ad_close"), w("ad_timer", "expandable", animated=True)] + filler(app, "interstitial", ["ad_title", "ad_body", "ad_logo"]))
    nav(app, "interstitial", "ad_close", "home")

    for s in sections:
        widgets = [w(f"{s}_story_{i}") for i in range(3)]
        widgets += [w(f"{s}_save"), w(f"{s}_spinner", "switch", animated=True)]
        widgets += filler(app, s, ["heading", "byline", "caption"], live=("caption",))
        widgets.append(w(f"{s}_back"))
        app.page(s, "SectionActivity", f"{s} news section", widgets)
        for i in range(3):
            app.t(s, f"{s}_story_{i}", labels=[f"{s}.story_{i}"])
        app.t(s, f"{s}_save", labels=[f"gated_{s}_offline_{i}" for i in range(4)], guard="offline")
        app.t(s, f"{s}_save", labels=[f"{s}.save_online"])
        nav(app, s, f"{s}_back", "home")

    app.page("settings", "SettingsActivity", "reader settings with offline mode",
             [w("offline_switch", "switch", bind="offline")]
             + filler(app, "settings", ["heading", "text_size", "night"], live=("text_size",)) + [w("settings_back")])
    app.t("settings", "offline_switch", labels=["settings.offline"], effects=[{"var": "offline", "toggle": True}])
    nav(app, "settings", "settings_back", "home")
    app.write("noise_news.app.json")


# ---------------------------------------------------------------------------
# shop: a cart container gates checkout; a filter toggles sale items in place
# ---------------------------------------------------------------------------
def shop():
    app = App("shop_cart", "home")
    app.var("cart_items", "counter", 0, max_=2)
    app.var("sale_filter", "bool", False)

    app.page("home", "MainActivity", "shop front page",
             [w("open_cart"), w("open_catalog"), w("open_account")]
             + filler(app, "home", ["logo", "deal", "banner", "footer"], live=("deal",)))
    nav(app, "home", "open_cart", "cart")
    nav(app, "home", "open_catalog", "catalog")
    nav(app, "home", "open_account", "account")

    app.page("cart", "CartActivity", "shopping cart with checkout",
             [w("cart_list", "container", bind="cart_items"), w("checkout")]
             + filler(app, "cart", ["heading", "total", "promo_code", "shipping"], live=("promo_code",)) + [w("cart_back")])
    app.t("cart", "checkout", "receipt", labels=[f"gated_checkout_{i}" for i in range(24)], guard="cart_items >= 1")
    app.t("cart", "checkout", labels=["cart.checkout_empty"])
    nav(app, "cart", "cart_back", "home")
    leaf(app, "receipt", "CartActivity", "order receipt", "home", ["order_no", "summary", "thanks"], live=("summary",), prefix="gated_")

    catalog = [w(f"product_{i}") for i in range(3)]
    catalog += [w("sale_switch", "switch", bind="sale_filter")]
    catalog += [w(f"sale_item_{i}", "list_item", visible="sale_filter") for i in range(2)]
    catalog += filler(app, "catalog", ["heading", "sort", "count", "legend", "page", "note"], live=("sort",)) + [w("catalog_back")]
    app.page("catalog", "CatalogActivity", "product catalog with a sale filter", catalog)
    for i in range(3):
        nav(app, "catalog", f"product_{i}", "product", f"catalog.open_{i}")
    app.t("catalog", "sale_switch", labels=["catalog.sale_filter"], effects=[{"var": "sale_filter", "toggle": True}])
    for i in range(2):
        app.t("catalog", f"sale_item_{i}", labels=[f"gated_sale_{i}_{j}" for j in range(6)])
    nav(app, "catalog", "catalog_back", "home")

    app.page("product", "CatalogActivity", "product details with add to cart",
             [w("add_to_cart"), w("cart_badge", "container", bind="cart_items"), w("product_reviews")]
             + filler(app, "product", ["name", "price", "photo", "stock"], live=("photo",)) + [w("product_back")])
    app.t("product", "add_to_cart", labels=["product.add"], effects=[{"var": "cart_items", "add": 1}])
    app.t("product", "product_reviews", labels=["product.reviews"])
    nav(app, "product", "product_back", "catalog")

    leaf(app, "account", "AccountActivity", "account overview", "home", ["name", "orders", "addresses"], live=("orders",))
    app.write("shop_cart.app.json")


# ---------------------------------------------------------------------------
# static: no state-bearing widgets at all (negative control)
# ---------------------------------------------------------------------------
def static():
    app = App("static_info", "home")
    app.page("home", "MainActivity", "information hub",
             [w("open_faq"), w("open_contact"), w("open_news")] + filler(app, "home", ["logo", "intro", "footer"], live=("intro",)))
    nav(app, "home", "open_faq", "faq")
    nav(app, "home", "open_contact", "contact")
    nav(app, "home", "open_news", "news")
    leaf(app, "faq", "InfoActivity", "frequently asked questions", "home", ["q1", "q2", "q3", "q4"], live=("q1", "q2"))
    leaf(app, "contact", "InfoActivity", "contact details", "home", ["phone", "mail", "map"], live=("map",))
    leaf(app, "news", "InfoActivity", "announcements", "home", ["latest", "archive", "rss"], live=("latest", "archive"))
    app.write("static_info.app.json")


if __name__ == "__main__":
    case1()
    case2()
    cascade()
    noise()
    shop()
    static()
