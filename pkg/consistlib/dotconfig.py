# Adapted from the dotconfig project <https://github.com/adammhaile/dotconfig>
# released under LGPL v3 <https://www.gnu.org/licenses/lgpl-3.0.en.html>

import os

import yaml

VALID_EXT = [
    'yaml',
    'yml',
]


class Config(object):
    def __init__(self, app=None, name=None, base_dir='~/.config/',
                 template=None, envvars=None, defaults=None, cli_args=None,
                 converters=None, path_override=None, file_override=None):
        """
        Load an app config with environment variable and CLI overrides.
        Config file path will be {base_dir}/{app}/{name}.[yaml|yml]

        :param str app: Application name
        :param str name: Name of app sub-config
        :param str base_dir: Base config dir. Defaults to '~/.config/`
        :param str/dict template: YAML string or dict written when no config exists
        :param dict envvars: Map of config keys to environment variables { key: APP_ENV_VAR }.
        These override anything in the config file
        :param dict defaults: Default values for config keys
        :param dict cli_args: Config key overrides from the app CLI.
        These override any config file or env var values unless None.
        :param dict converters: { key: callable } applied to the merged values,
        so env var strings become ints etc.
        :param str path_override: Specify direct path instead of default base dir
        :param str file_override: Direct path to config file to read

        :raises IOError: when the file override is missing or permission is denied
        """
        self.filename = None
        self.full_path = None

        if file_override is not None:
            self.full_path = file_override
            if not os.path.isfile(self.full_path):
                raise IOError('Unable to find specified file {}'.format(self.full_path))
        else:
            if path_override:
                self.base_dir = os.path.expanduser(path_override)
            else:
                self.base_dir = os.path.expanduser(os.path.join(base_dir, app))

            os.makedirs(self.base_dir, exist_ok=True)

            for ext in VALID_EXT:
                for _ext in [ext, ext.upper()]:
                    filename = '{}.{}'.format(name, _ext)
                    cfg = os.path.join(self.base_dir, filename)
                    if os.path.isfile(cfg):
                        self.full_path = cfg
                        self.filename = filename
                        break
                if self.full_path:
                    break

            if self.filename is None:
                self.filename = name + '.' + VALID_EXT[0]
                self.full_path = os.path.join(self.base_dir, self.filename)
                with open(self.full_path, 'w') as f:
                    if isinstance(template, str):
                        f.write(template)
                    else:
                        yaml.safe_dump(template or {}, f, default_flow_style=False)

        self._data = dict(defaults or {})
        with open(self.full_path, 'r') as f:
            data = yaml.safe_load(f) or {}
        # a commented template parses to keys with None values; keep defaults for those
        self._data.update({k: v for k, v in data.items() if v is not None or k not in self._data})

        for k, v in (envvars or {}).items():
            if v in os.environ:
                self._data[k] = os.environ[v]

        for k, v in (cli_args or {}).items():
            if k not in self._data or v is not None:
                self._data[k] = v

        for k, convert in (converters or {}).items():
            if self._data.get(k) is not None:
                self._data[k] = convert(self._data[k])

    def __getitem__(self, item):
        return self._data[item]

    def get(self, item, default=None):
        return self._data.get(item, default)

    def items(self):
        return self._data.items()

    def to_dict(self):
        return dict(self._data)
