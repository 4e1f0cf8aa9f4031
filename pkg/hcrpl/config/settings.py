# 应用配置管理模块 - 使用 Pydantic Settings 管理环境变量和进程级配置
from pydantic import Field, validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process settings loaded from environment variables (prefix ``HCRPL_``)."""

    model_config = SettingsConfigDict(
        env_prefix="HCRPL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application settings
    app_name: str = Field(default="hcrpl", description="Application name")
    log_level: str = Field(default="INFO", description="Logging level")
    log_format: str = Field(default="json", description="Log renderer (json or console)")

    # Runs
    runs_dir: str = Field(default="runs", description="Default root for run directories")

    # Monitoring
    enable_metrics: bool = Field(default=True, description="Write a Prometheus textfile per run")

    @validator("log_level")
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is one of the allowed values."""
        allowed_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed_levels:
            raise ValueError(f"Log level must be one of {allowed_levels}")
        return v.upper()

    @validator("log_format")
    def validate_log_format(cls, v: str) -> str:
        """Validate the log renderer name."""
        allowed_formats = ["json", "console"]
        if v.lower() not in allowed_formats:
            raise ValueError(f"Log format must be one of {allowed_formats}")
        return v.lower()


# Global settings instance
settings = Settings()
