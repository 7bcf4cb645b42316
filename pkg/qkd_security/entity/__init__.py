from qkd_security.entity.config_entity import RunConfig

__all__ = ["RunConfig"]
