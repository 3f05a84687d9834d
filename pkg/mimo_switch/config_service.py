from pathlib import Path
from typing import Any

import tomlkit
from pydantic import ValidationError
from tomlkit.toml_document import TOMLDocument

from .exceptions import ConfigurationError
from .models import AppConfig, McsEntry

SECTIONS = ("system", "timing", "run")


class ConfigService:
    def __init__(self, config_path: Path):
        self.config_path = config_path

    def load(self) -> AppConfig:
        doc = self._load_document()
        try:
            return AppConfig.model_validate(doc.unwrap())
        except ValidationError as e:
            raise ConfigurationError(f"Config parse error in {self.config_path}: {e}")

    def show(self) -> str:
        if not self.config_path.exists():
            raise ConfigurationError(f"Config not found at {self.config_path}")
        return tomlkit.dumps(self._load_document())

    def _load_document(self) -> TOMLDocument:
        if not self.config_path.exists():
            return tomlkit.document()

        try:
            with self.config_path.open("r", encoding="utf-8") as f:
                return tomlkit.load(f)
        except Exception as e:
            raise ConfigurationError(f"Failed to load config: {e}")

    def _save_document(self, doc: TOMLDocument) -> None:
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        with self.config_path.open("w", encoding="utf-8") as f:
            tomlkit.dump(doc, f)

    def _ensure_table(self, doc: TOMLDocument, *keys: str) -> Any:
        current = doc
        for key in keys:
            if key not in current:
                current[key] = tomlkit.table()
            current = current[key]
        return current

    # --- Whole file ---

    def init(self, force: bool = False) -> None:
        if self.config_path.exists() and not force:
            raise ConfigurationError(f"Config already exists at {self.config_path} (use --force to overwrite)")

        defaults = AppConfig()
        doc = tomlkit.document()
        doc.add(tomlkit.comment("mimo-switch simulation settings; CLI flags override [run]"))
        doc.add(tomlkit.nl())
        for section in SECTIONS:
            table = tomlkit.table()
            # None means "mode default" and has no TOML spelling
            values = getattr(defaults, section).model_dump(mode="json", exclude_none=True)
            for key, value in values.items():
                table[key] = value
            doc[section] = table

        mcs = tomlkit.aot()
        for entry in defaults.mcs:
            mcs.append(tomlkit.item(entry.model_dump()))
        doc["mcs"] = mcs
        self._save_document(doc)

    # --- Single values ---

    def _split_key(self, key: str) -> tuple[str, str]:
        section, _, name = key.partition(".")
        if section not in SECTIONS or not name:
            raise ConfigurationError(f"Unknown key '{key}' (expected one of {', '.join(SECTIONS)} followed by .name)")
        model = type(getattr(AppConfig(), section))
        if name not in model.model_fields:
            raise ConfigurationError(f"Unknown setting '{name}' in [{section}]")
        return section, name

    def get(self, key: str) -> Any:
        section, name = self._split_key(key)
        return getattr(getattr(self.load(), section), name)

    def set(self, key: str, value: str) -> None:
        section, name = self._split_key(key)
        doc = self._load_document()
        table = self._ensure_table(doc, section)
        table[name] = _parse_value(value)

        try:
            AppConfig.model_validate(doc.unwrap())
        except ValidationError as e:
            raise ConfigurationError(f"Invalid value for {key}: {e}")
        self._save_document(doc)

    # --- MCS table ---

    def list_mcs(self) -> tuple[McsEntry, ...]:
        return self.load().mcs


def _parse_value(raw: str) -> Any:
    """Read ``raw`` as a TOML value; bare words fall back to strings."""
    try:
        return tomlkit.parse(f"value = {raw}").unwrap()["value"]
    except Exception:
        return raw
