from datetime import datetime
from pathlib import Path
from zoneinfo import ZoneInfo

from app.core.config import settings

LOG_DIR = Path(settings.LOG_DIR)

LEVELS = {"DEBUG": 10, "INFO": 20, "PERFORMANCE": 20, "OUTPUT": 20, "WARNING": 30, "ERROR": 40, "CRITICAL": 50}



class Logger:
    COLORS = {
        "INFO": "\033[94m",       # Blue
        "DEBUG": "\033[90m",      # Gray
        "WARNING": "\033[93m",    # Yellow
        "ERROR": "\033[91m",      # Red
        "CRITICAL": "\033[95m",   # Magenta
        "PERFORMANCE": "\033[92m",# Green
        "OUTPUT": "\033[96m",     # Cyan
        "RESET": "\033[0m",
    }


    def __init__(self, name="Logger"):
        self.name = name
        self.threshold = LEVELS.get(settings.LOG_LEVEL.upper(), 20)


    def _log(self, level, message, log_name=None):
        if LEVELS.get(level, 20) < self.threshold:
            return

        timestamp = datetime.now(ZoneInfo(settings.LOG_TIMEZONE)).strftime("%Y-%m-%d %H:%M:%S")
        colored_level = f"{self.COLORS.get(level, '')}{level:<11}{self.COLORS['RESET']}"
        full_msg = f"[{timestamp}] [{self.name}] {colored_level} {message}"

        # Print to terminal
        if level in ("ERROR", "CRITICAL"):
            print(full_msg)

        # Save to file if enabled
        if log_name:
            LOG_DIR.mkdir(parents=True, exist_ok=True)
            uncolored = f"[{timestamp}] [{self.name}] {level:<11} {message}"
            with (LOG_DIR / log_name).open("a", encoding="utf-8") as f:
                f.write(uncolored + "\n")


    def info(self, message): self._log(level="INFO", message=message, log_name="operation.log")
    def debug(self, message): self._log(level="DEBUG", message=message, log_name="operation.log")
    def warning(self, message): self._log(level="WARNING", message=message, log_name="operation.log")
    def error(self, message): self._log(level="ERROR", message=message, log_name="operation.log")
    def critical(self, message): self._log(level="CRITICAL", message=message, log_name="operation.log")
    def performance(self, message): self._log(level="PERFORMANCE", message=message, log_name="performance.log")
    def output(self, message): self._log(level="OUTPUT", message=message, log_name="outputs.log")
