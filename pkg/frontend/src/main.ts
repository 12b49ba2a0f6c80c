/** stdin/stdout line loop; exits when stdin closes. */

import { createInterface } from 'readline';
import { handleLine } from './oracle';

export function serve(): void {
  const rl = createInterface({ input: process.stdin, terminal: false });
  rl.on('line', (line: string) => {
    if (line.trim() === '') return;
    const response = handleLine(line);
    process.stdout.write(JSON.stringify(response) + '\n');
  });
}

if (require.main === module) {
  serve();
}
