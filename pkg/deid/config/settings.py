from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="DEID_", case_sensitive=False)

    log_level: str = "INFO"
    audit_log_path: Path = Path("artifacts/audit/events.jsonl")
    contracts_dir: Path = Path(__file__).resolve().parents[2] / "docs" / "contracts" / "v1"

    # UID generation
    uid_root: str = Field(default="2.25", description="Root prefix for replacement UIDs")

    # Codec limits
    parse_max_depth: int = 16
    parse_max_element_length: int = 2**31

    default_jobs: int = 4

    # Text cleaning
    clean_triggers: str = "for,by,at,to,on"
    clean_address_keywords: str = ""

    @property
    def clean_trigger_set(self) -> set[str]:
        return {item.strip().lower() for item in self.clean_triggers.split(",") if item.strip()}

    @property
    def clean_address_keyword_set(self) -> set[str]:
        return {
            item.strip().lower()
            for item in self.clean_address_keywords.split(",")
            if item.strip()
        }


@lru_cache
def get_settings() -> Settings:
    return Settings()


def clear_settings_cache() -> None:
    get_settings.cache_clear()
