// Ambient declarations for runtime-only dependencies whose published type
// packages are not vendored here. Only the surface this package uses.

declare module "papaparse" {
  export interface ParseError {
    message: string;
    row?: number;
  }
  export interface ParseMeta {
    fields?: string[];
  }
  export interface ParseResult<T> {
    data: T[];
    errors: ParseError[];
    meta: ParseMeta;
  }
  export function parse<T>(
    input: string,
    config?: { header?: boolean; dynamicTyping?: boolean }
  ): ParseResult<T>;
}

declare module "yargs" {
  interface Argv {
    usage(msg: string): Argv;
    option(name: string, spec: Record<string, unknown>): Argv;
    strict(): Argv;
    parseSync(): Record<string, unknown>;
  }
  function yargs(argv: string[]): Argv;
  export default yargs;
}
